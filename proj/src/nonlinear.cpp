#include "crmlab/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "crmlab/error.hpp"

namespace crmlab {

double SmoothSignal::derivative(double t, int order) const {
  const double arg = omega * t + phase + 0.5 * std::numbers::pi * order;
  const double v = amplitude * std::pow(omega, order) * std::sin(arg);
  return order == 0 ? v + offset : v;
}

Vec SmoothSignal::derivatives(double t, int order) const {
  Vec out(order + 1);
  for (int k = 0; k <= order; ++k) out[k] = derivative(t, k);
  return out;
}

namespace {

bool symmetric_pd(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
    return false;
  }
  return Eigen::LLT<Mat>(M).info() == Eigen::Success;
}

}  // namespace

void StrictFeedbackSystem::validate() const {
  if (n < 1 || n > 3) {
    throw Error(ErrorKind::kUnsupportedOrder,
                "backstepping order n=" + std::to_string(n) + " (supported: 1, 2, 3)");
  }
  if (p < 1) throw Error(ErrorKind::kInvalidConfig, "parameter dimension must be >= 1");
  if (!phi || !phi_jacobian || !beta) {
    throw Error(ErrorKind::kInvalidConfig, "regressor, Jacobian and beta must be set");
  }
  if (theta_star.size() != p) {
    throw Error(ErrorKind::kInvalidConfig, "theta_star must have p entries");
  }
}

StrictFeedbackSystem strict_feedback_preset(const std::string& regressor, int n,
                                            double theta_star, double beta0, double beta1,
                                            SmoothSignal y_r) {
  StrictFeedbackSystem sys;
  sys.n = n;
  sys.p = 1;
  sys.theta_star = Vec::Constant(1, theta_star);
  sys.y_r = y_r;
  sys.beta = [beta0, beta1](const Vec& x) { return beta0 + beta1 * x[0] * x[0]; };
  if (regressor == "x1_squared") {
    sys.phi = [](int i, const Vec& x) {
      return Vec::Constant(1, i == 1 ? x[0] * x[0] : 0.0);
    };
    sys.phi_jacobian = [](int i, const Vec& x) {
      Mat J = Mat::Zero(1, x.size());
      if (i == 1) J(0, 0) = 2.0 * x[0];
      return J;
    };
  } else if (regressor == "squares") {
    sys.phi = [](int i, const Vec& x) { return Vec::Constant(1, x[i - 1] * x[i - 1]); };
    sys.phi_jacobian = [](int i, const Vec& x) {
      Mat J = Mat::Zero(1, x.size());
      J(0, i - 1) = 2.0 * x[i - 1];
      return J;
    };
  } else {
    throw Error(ErrorKind::kInvalidConfig, "unknown regressor '" + regressor + "'");
  }
  return sys;
}

void BacksteppingDesign::validate(int n, int p) const {
  if (c.size() != n) throw Error(ErrorKind::kInvalidConfig, "design.c must have n entries");
  if (!(c.minCoeff() > 0.0)) throw Error(ErrorKind::kInvalidConfig, "design.c must be > 0");
  if (Gamma.rows() != p || !symmetric_pd(Gamma)) {
    throw Error(ErrorKind::kInvalidConfig, "design.Gamma must be p×p symmetric positive definite");
  }
}

namespace {

// Partial derivatives of one α_k.
struct Partials {
  Vec dx;     // ∂α/∂x_j
  Vec dyr;    // ∂α/∂y_r^(j)
  Vec dtheta;
};

struct Chain {
  std::vector<double> z;      // 0..m, z[0] = 0
  std::vector<double> alpha;  // 0..m, α_0 = 0
  std::vector<Vec> w;         // 1..m
  Vec tau;
  std::vector<Partials> dalpha;  // partials of α_0..α_{m-1}
};

Partials zero_partials(int n, int p) {
  return {Vec::Zero(n), Vec::Zero(n + 1), Vec::Zero(p)};
}

Chain run_chain(const StrictFeedbackSystem& sys, const BacksteppingDesign& d,
                const Vec& theta, const Vec& x, const Vec& yr, int m);

Partials alpha1_partials(const StrictFeedbackSystem& sys, const BacksteppingDesign& d,
                         const Vec& theta, const Vec& x) {
  Partials out = zero_partials(sys.n, sys.p);
  out.dx[0] = -d.c[0] - sys.phi_jacobian(1, x).col(0).dot(theta);
  out.dyr[0] = d.c[0];
  out.dtheta = -sys.phi(1, x);
  return out;
}

Partials fd_partials(const StrictFeedbackSystem& sys, const BacksteppingDesign& d,
                     const Vec& theta, const Vec& x, const Vec& yr, int k) {
  constexpr double h = 1e-6;
  Partials out = zero_partials(sys.n, sys.p);
  const auto alpha = [&](const Vec& th, const Vec& xx, const Vec& y) {
    return run_chain(sys, d, th, xx, y, k).alpha[k];
  };
  for (int j = 0; j < k; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    out.dx[j] = (alpha(theta, xp, yr) - alpha(theta, xm, yr)) / (2.0 * h);
    Vec yp = yr, ym = yr;
    yp[j] += h;
    ym[j] -= h;
    out.dyr[j] = (alpha(theta, x, yp) - alpha(theta, x, ym)) / (2.0 * h);
  }
  for (int j = 0; j < sys.p; ++j) {
    Vec tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    out.dtheta[j] = (alpha(tp, x, yr) - alpha(tm, x, yr)) / (2.0 * h);
  }
  return out;
}

Chain run_chain(const StrictFeedbackSystem& sys, const BacksteppingDesign& d,
                const Vec& theta, const Vec& x, const Vec& yr, int m) {
  Chain ch;
  ch.z.assign(m + 1, 0.0);
  ch.alpha.assign(m + 1, 0.0);
  ch.w.assign(m + 1, Vec::Zero(sys.p));
  ch.tau = Vec::Zero(sys.p);
  ch.dalpha.assign(m + 1, zero_partials(sys.n, sys.p));
  for (int i = 1; i <= m; ++i) {
    if (i - 1 == 1) {
      ch.dalpha[1] = alpha1_partials(sys, d, theta, x);
    } else if (i - 1 >= 2) {
      ch.dalpha[i - 1] = fd_partials(sys, d, theta, x, yr, i - 1);
    }
    const Partials& dp = ch.dalpha[i - 1];
    const double zi = x[i - 1] - yr[i - 1] - ch.alpha[i - 1];
    Vec wi = sys.phi(i, x);
    for (int k = 1; k < i; ++k) wi -= dp.dx[k - 1] * sys.phi(k, x);
    ch.tau += wi * zi;
    double a = -ch.z[i - 1] - d.c[i - 1] * zi - wi.dot(theta);
    for (int k = 1; k < i; ++k) a += dp.dx[k - 1] * x[k] + dp.dyr[k - 1] * yr[k];
    a += dp.dtheta.dot(d.Gamma * ch.tau);
    for (int k = 2; k < i; ++k) a += ch.dalpha[k - 1].dtheta.dot(d.Gamma * wi) * ch.z[k];
    ch.z[i] = zi;
    ch.alpha[i] = a;
    ch.w[i] = wi;
  }
  return ch;
}

}  // namespace

BacksteppingEval backstepping_design(const StrictFeedbackSystem& sys,
                                     const BacksteppingDesign& design, const Vec& theta,
                                     const Vec& x, const Vec& yr) {
  sys.validate();
  const int n = sys.n;
  if (x.size() != n || theta.size() != sys.p || yr.size() < n + 1) {
    throw Error(ErrorKind::kInvalidConfig, "backstepping_design: dimension mismatch");
  }
  const Chain ch = run_chain(sys, design, theta, x, yr, n);
  const double b = sys.beta(x);
  if (!(std::abs(b) > 1e-12)) {
    throw Error(ErrorKind::kSingularBeta, "beta(x) = " + format_double(b));
  }
  BacksteppingEval out;
  out.z.resize(n);
  out.alpha.resize(n);
  out.W.resize(sys.p, n);
  for (int i = 1; i <= n; ++i) {
    out.z[i - 1] = ch.z[i];
    out.alpha[i - 1] = ch.alpha[i];
    out.W.col(i - 1) = ch.w[i];
  }
  out.tau = ch.tau;
  out.u = (ch.alpha[n] + yr[n]) / b;

  out.A_z = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) out.A_z(i, i) = -design.c[i];
  for (int i = 0; i + 1 < n; ++i) {
    out.A_z(i, i + 1) += 1.0;
    out.A_z(i + 1, i) -= 1.0;
  }
  // σ_ik = −(∂α_{i−1}/∂θ) Γ w_k for 2 ≤ i < k ≤ n.
  for (int i = 2; i <= n; ++i) {
    for (int k = i + 1; k <= n; ++k) {
      const double sigma = -ch.dalpha[i - 1].dtheta.dot(design.Gamma * ch.w[k]);
      out.A_z(i - 1, k - 1) += sigma;
      out.A_z(k - 1, i - 1) -= sigma;
    }
  }
  return out;
}

Vec state_from_z(const StrictFeedbackSystem& sys, const BacksteppingDesign& design,
                 const Vec& theta, const Vec& z, const Vec& yr) {
  sys.validate();
  Vec x = Vec::Zero(sys.n);
  for (int i = 1; i <= sys.n; ++i) {
    // α_{i−1} depends on x_1..x_{i−1} only, so fill the state in order.
    const double prev = i == 1 ? 0.0 : run_chain(sys, design, theta, x, yr, i - 1).alpha[i - 1];
    x[i - 1] = z[i - 1] + yr[i - 1] + prev;
  }
  return x;
}

IntegratorConfig BacksteppingScenario::default_integrator() {
  IntegratorConfig cfg;
  cfg.method = Method::kRk4;
  cfg.dt = 1e-3;
  cfg.horizon = 20.0;
  cfg.record_dt = 0.01;
  return cfg;
}

void BacksteppingScenario::validate() const {
  system.validate();
  design.validate(system.n, system.p);
  if (theta0.size() != system.p || x0.size() != system.n) {
    throw Error(ErrorKind::kInvalidConfig, "theta0 / x0 dimension mismatch");
  }
  integrator.validate();
  check_fixed_step_rule(integrator, std::max(design.c.maxCoeff(),
                                             design.Gamma.cwiseAbs().maxCoeff()));
}

double BacksteppingScenario::lyapunov(const Vec& z, const Vec& theta) const {
  const Vec tt = theta - system.theta_star;
  return 0.5 * z.squaredNorm() + 0.5 * tt.dot(design.Gamma.llt().solve(tt));
}

double BacksteppingScenario::initial_lyapunov() const {
  const Vec yr = system.y_r.derivatives(0.0, system.n);
  const BacksteppingEval ev = backstepping_design(system, design, theta0, x0, yr);
  return lyapunov(ev.z, theta0);
}

VectorField backstepping_loop(const BacksteppingScenario& s) {
  s.validate();
  return [s](double t, const Vec& state, Vec& dxdt) {
    const int n = s.system.n;
    const int p = s.system.p;
    const Vec x = state.head(n);
    const Vec theta = state.segment(n, p);
    const Vec yr = s.system.y_r.derivatives(t, n);
    const BacksteppingEval ev = backstepping_design(s.system, s.design, theta, x, yr);
    dxdt.resize(n + p + 1);
    for (int i = 1; i <= n; ++i) {
      const double drift = s.system.phi(i, x).dot(s.system.theta_star);
      dxdt[i - 1] = (i < n ? x[i] : s.system.beta(x) * ev.u) + drift;
    }
    dxdt.segment(n, p) = s.design.Gamma * ev.tau;
    dxdt[n + p] = ev.z.squaredNorm();
  };
}

Trajectory simulate_backstepping(const BacksteppingScenario& s) {
  const VectorField f = backstepping_loop(s);
  const int n = s.system.n;
  const int p = s.system.p;
  Vec x0(n + p + 1);
  x0 << s.x0, s.theta0, 0.0;
  const StateHistory hist = integrate_states(f, x0, s.integrator);

  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("z_" + std::to_string(i));
  for (int j = 1; j <= p; ++j) names.push_back("theta_" + std::to_string(j));
  names.insert(names.end(), {"u", "V", "int_z2"});
  for (int i = 1; i <= n; ++i) {
    for (int k = 1; k <= n; ++k) names.push_back("Az_" + std::to_string(i) + std::to_string(k));
  }
  std::ostringstream meta;
  meta << s.name << "; n=" << n << "; " << s.integrator.describe();
  Trajectory traj(names, meta.str());
  std::vector<double> row;
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    const Vec& st = hist.states[k];
    const Vec x = st.head(n);
    const Vec theta = st.segment(n, p);
    const BacksteppingEval ev = backstepping_design(
        s.system, s.design, theta, x, s.system.y_r.derivatives(hist.times[k], n));
    row.clear();
    for (int i = 0; i < n; ++i) row.push_back(x[i]);
    for (int i = 0; i < n; ++i) row.push_back(ev.z[i]);
    for (int j = 0; j < p; ++j) row.push_back(theta[j]);
    row.push_back(ev.u);
    row.push_back(s.lyapunov(ev.z, theta));
    row.push_back(st[n + p]);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) row.push_back(ev.A_z(i, j));
    }
    traj.append(hist.times[k], row);
  }
  return traj;
}

std::vector<BoundCertificate> certify_backstepping_run(const Trajectory& traj,
                                                       const BacksteppingScenario& s) {
  s.validate();
  std::vector<BoundCertificate> certs;
  const auto& v = traj.channel("V");
  const double v0 = v.front();
  const double rd = s.integrator.record_dt;
  certs.push_back(make_certificate("z_L2", traj.channel("int_z2").back(), v0 / s.design.c0(),
                                   10.0 * rd * rd));

  double worst_inc = -INFINITY;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) worst_inc = std::max(worst_inc, v[k + 1] - v[k]);
  BoundCertificate inc = make_certificate("V_nonincreasing", worst_inc, 1e-8);
  inc.pass = worst_inc <= 1e-8;
  certs.push_back(inc);

  const int n = s.system.n;
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        const double aij = traj.channel("Az_" + std::to_string(i) + std::to_string(j))[k];
        const double aji = traj.channel("Az_" + std::to_string(j) + std::to_string(i))[k];
        const double target = i == j ? -2.0 * s.design.c[i - 1] : 0.0;
        worst = std::max(worst, std::abs(aij + aji - target));
      }
    }
  }
  BoundCertificate skew = make_certificate("Az_skew_structure", worst, 1e-12);
  skew.pass = worst <= 1e-12;
  skew.note = "max |A_z + A_z^T - diag(-2c)|";
  certs.push_back(skew);
  return certs;
}

void RobotModel::validate() const {
  for (double v : {m1, m2, l1, l2}) {
    if (!(v > 0.0)) throw Error(ErrorKind::kInvalidConfig, "robot masses and lengths must be > 0");
  }
  if (!std::isfinite(gravity)) throw Error(ErrorKind::kInvalidConfig, "gravity must be finite");
}

Vec RobotModel::parameters() const {
  Vec a(3);
  a << (m1 + m2) * l1 * l1, m2 * l2 * l2, m2 * l1 * l2;
  return a;
}

Mat RobotModel::H(const Vec& q) const {
  const Vec a = parameters();
  const double c2 = std::cos(q[1]);
  Mat h(2, 2);
  h << a[0] + a[1] + 2.0 * a[2] * c2, a[1] + a[2] * c2, a[1] + a[2] * c2, a[1];
  return h;
}

Mat RobotModel::C(const Vec& q, const Vec& qd) const {
  const double h = parameters()[2] * std::sin(q[1]);
  Mat c(2, 2);
  c << -h * qd[1], -h * (qd[0] + qd[1]), h * qd[0], 0.0;
  return c;
}

Vec RobotModel::g(const Vec& q) const {
  const double c1 = std::cos(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  Vec out(2);
  out << (m1 + m2) * gravity * l1 * c1 + m2 * gravity * l2 * c12, m2 * gravity * l2 * c12;
  return out;
}

Mat RobotModel::Y(const Vec& q, const Vec& qd, const Vec& qd_r, const Vec& qdd_r) const {
  const double c1 = std::cos(q[0]);
  const double c2 = std::cos(q[1]);
  const double s2 = std::sin(q[1]);
  const double c12 = std::cos(q[0] + q[1]);
  Mat y(2, 3);
  y(0, 0) = qdd_r[0] + gravity / l1 * c1;
  y(0, 1) = qdd_r[0] + qdd_r[1] + gravity / l2 * c12;
  y(0, 2) = c2 * (2.0 * qdd_r[0] + qdd_r[1]) - s2 * (qd[1] * qd_r[0] + (qd[0] + qd[1]) * qd_r[1]);
  y(1, 0) = 0.0;
  y(1, 1) = qdd_r[0] + qdd_r[1] + gravity / l2 * c12;
  y(1, 2) = c2 * qdd_r[0] + s2 * qd[0] * qd_r[0];
  return y;
}

void RobotController::validate() const {
  if (k_d.rows() != 2 || !symmetric_pd(k_d)) {
    throw Error(ErrorKind::kInvalidConfig, "k_d must be 2×2 symmetric positive definite");
  }
  if (!(lambda > 0.0)) throw Error(ErrorKind::kInvalidConfig, "lambda must be > 0");
  if (Gamma.rows() != 3 || !symmetric_pd(Gamma)) {
    throw Error(ErrorKind::kInvalidConfig, "Gamma must be 3×3 symmetric positive definite");
  }
}

Vec JointTrajectory::q(double t, int order) const {
  Vec out(2);
  out << q1.derivative(t, order), q2.derivative(t, order);
  return out;
}

IntegratorConfig RobotScenario::default_integrator() {
  IntegratorConfig cfg = BacksteppingScenario::default_integrator();
  cfg.dt = 5e-4;
  return cfg;
}

void RobotScenario::validate() const {
  model.validate();
  controller.validate();
  if (q0.size() != 2 || qd0.size() != 2 || a_hat0.size() != 3) {
    throw Error(ErrorKind::kInvalidConfig, "robot initial state dimension mismatch");
  }
  integrator.validate();
  check_fixed_step_rule(integrator, std::max({controller.lambda, controller.k_d.maxCoeff(),
                                              controller.Gamma.maxCoeff()}));
}

namespace {

struct RobotSignals {
  Vec q_tilde, s, qd_r, qdd_r, tau;
  Mat Y;
};

RobotSignals robot_signals(const RobotScenario& sc, double t, const Vec& q, const Vec& qd,
                           const Vec& a_hat) {
  RobotSignals out;
  const Vec q_des = sc.desired.q(t, 0);
  const Vec qd_des = sc.desired.q(t, 1);
  const Vec qdd_des = sc.desired.q(t, 2);
  const double lam = sc.controller.lambda;
  out.q_tilde = q - q_des;
  out.qd_r = qd_des - lam * out.q_tilde;
  out.qdd_r = qdd_des - lam * (qd - qd_des);
  out.s = qd - out.qd_r;
  out.Y = sc.model.Y(q, qd, out.qd_r, out.qdd_r);
  out.tau = out.Y * a_hat - sc.controller.k_d * out.s;
  return out;
}

double robot_lyapunov(const RobotScenario& sc, const Vec& q, const Vec& s, const Vec& a_hat) {
  const Vec at = a_hat - sc.model.parameters();
  return 0.5 * (s.dot(sc.model.H(q) * s) + at.dot(sc.controller.Gamma.llt().solve(at)));
}

}  // namespace

VectorField robot_loop(const RobotScenario& sc) {
  sc.validate();
  return [sc](double t, const Vec& x, Vec& dxdt) {
    const Vec q = x.segment(0, 2);
    const Vec qd = x.segment(2, 2);
    const Vec a_hat = x.segment(4, 3);
    const RobotSignals sig = robot_signals(sc, t, q, qd, a_hat);
    const Mat H = sc.model.H(q);
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kSingularInertia, "inertia matrix is not positive definite");
    }
    const Vec qdd = llt.solve(sig.tau - sc.model.C(q, qd) * qd - sc.model.g(q));
    dxdt.resize(8);
    dxdt.segment(0, 2) = qd;
    dxdt.segment(2, 2) = qdd;
    dxdt.segment(4, 3) = -sc.controller.Gamma * sig.Y.transpose() * sig.s;
    dxdt[7] = sig.s.dot(sc.controller.k_d * sig.s);
  };
}

Trajectory simulate_robot(const RobotScenario& sc) {
  const VectorField f = robot_loop(sc);
  Vec x0(8);
  x0 << sc.q0, sc.qd0, sc.a_hat0, 0.0;
  const StateHistory hist = integrate_states(f, x0, sc.integrator);
  const std::vector<std::string> names = {
      "q_1",    "q_2",    "q_d_1",   "q_d_2",   "q_tilde_1", "q_tilde_2", "s_1",
      "s_2",    "a_hat_1", "a_hat_2", "a_hat_3", "tau_1",     "tau_2",     "V",
      "int_s_kd_s"};
  std::ostringstream meta;
  meta << sc.name << "; " << sc.integrator.describe();
  Trajectory traj(names, meta.str());
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    const double t = hist.times[k];
    const Vec& x = hist.states[k];
    const Vec q = x.segment(0, 2);
    const Vec a_hat = x.segment(4, 3);
    const RobotSignals sig = robot_signals(sc, t, q, x.segment(2, 2), a_hat);
    const Vec q_des = sc.desired.q(t, 0);
    const std::vector<double> row = {
        q[0],     q[1],     q_des[0],   q_des[1],   sig.q_tilde[0], sig.q_tilde[1],
        sig.s[0], sig.s[1], a_hat[0],   a_hat[1],   a_hat[2],       sig.tau[0],
        sig.tau[1], robot_lyapunov(sc, q, sig.s, a_hat), x[7]};
    traj.append(t, row);
  }
  return traj;
}

std::vector<BoundCertificate> certify_robot_run(const Trajectory& traj, const RobotScenario& sc) {
  sc.validate();
  const auto& t = traj.times();
  const auto& v = traj.channel("V");
  const auto& diss = traj.channel("int_s_kd_s");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double rate = (v[k + 1] - v[k] + diss[k + 1] - diss[k]) / (t[k + 1] - t[k]);
    worst = std::max(worst, std::abs(rate));
  }
  BoundCertificate c = make_certificate("V_dissipation", worst, 1e-4);
  c.pass = worst <= 1e-4;
  c.note = "max |dV/dt + s^T k_d s| on the record grid";
  return {c};
}

double skew_symmetry_residual(const RobotModel& model, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> rate(-3.0, 3.0);
  constexpr double h = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec q(2), qd(2), x(2);
    q << angle(rng), angle(rng);
    qd << rate(rng), rate(rng);
    x << rate(rng), rate(rng);
    // Five-point central stencil along q̇.
    const auto at = [&](double k) { return model.H(q + k * h * qd); };
    const Mat Hdot = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h);
    const Mat N = Hdot - 2.0 * model.C(q, qd);
    worst = std::max(worst, std::abs(x.dot(N * x)));
  }
  return worst;
}

}  // namespace crmlab
