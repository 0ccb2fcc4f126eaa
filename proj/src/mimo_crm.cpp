#include "crmlab/mimo_crm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "crmlab/error.hpp"
#include "crmlab/signal_ops.hpp"

namespace crmlab {
namespace {

std::string dims(const Mat& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

double max_real_eig(const Mat& M) {
  const Eigen::EigenSolver<Mat> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(M).singularValues()(0);
}

Vec flatten(const Mat& M) {
  Vec v(M.size());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) v[i * M.cols() + j] = M(i, j);
  }
  return v;
}

Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = v[i * cols + j];
  }
  return M;
}

Mat project_matrix(const Mat& update, const Mat& value,
                   const std::optional<ProjectionSet>& set) {
  if (!set) return update;
  return unflatten(project_unchecked(flatten(update), flatten(value), *set),
                   update.rows(), update.cols());
}

}  // namespace

void MimoPlant::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw Error(ErrorKind::kInvalidConfig, "plant.A must be square and nonempty, got " + dims(A));
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw Error(ErrorKind::kInvalidConfig, "plant.B must be " + std::to_string(A.rows()) +
                                               "xm, got " + dims(B));
  }
  if (Lambda.rows() != B.cols() || Lambda.cols() != B.cols()) {
    throw Error(ErrorKind::kInvalidConfig, "plant.Lambda must be " +
                                               std::to_string(B.cols()) + "x" +
                                               std::to_string(B.cols()) + ", got " + dims(Lambda));
  }
  if (!A.allFinite() || !B.allFinite() || !Lambda.allFinite()) {
    throw Error(ErrorKind::kInvalidConfig, "plant matrices must be finite");
  }
  if ((Lambda - Lambda.transpose()).norm() > 1e-12 * std::max(1.0, Lambda.norm())) {
    throw Error(ErrorKind::kInvalidConfig, "plant.Lambda must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat> es(Lambda);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "plant.Lambda must be positive definite");
  }
  if (es.eigenvalues().maxCoeff() > lambda_bar * (1.0 + 1e-12)) {
    throw Error(ErrorKind::kInvalidConfig,
                "plant.lambda_bar=" + format_double(lambda_bar) +
                    " is below the largest eigenvalue of Lambda (" +
                    format_double(es.eigenvalues().maxCoeff()) + ")");
  }
}

Mat MimoReference::L() const {
  if (L_override) return *L_override;
  return -A_m + g * Mat::Identity(A_m.rows(), A_m.cols());
}

Mat MimoReference::P() const { return 0.5 * Mat::Identity(A_m.rows(), A_m.rows()); }

Mat MimoReference::Q() const { return std::abs(g) * Mat::Identity(A_m.rows(), A_m.rows()); }

void MimoReference::validate(Eigen::Index n) const {
  if (A_m.rows() != n || A_m.cols() != n) {
    throw Error(ErrorKind::kInvalidConfig,
                "reference.A_m must be " + std::to_string(n) + "x" + std::to_string(n) +
                    ", got " + dims(A_m));
  }
  if (!(g < 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "reference.g must be < 0");
  }
  if (!(max_real_eig(A_m) < 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "reference.A_m must be Hurwitz");
  }
  if (L_override) {
    const Mat expected = -A_m + g * Mat::Identity(n, n);
    if (L_override->rows() != n || L_override->cols() != n ||
        (*L_override - expected).norm() > 1e-12 * std::max(1.0, expected.norm())) {
      throw Error(ErrorKind::kAssumptionViolated,
                  "reference.L must equal -A_m + g I for the certified design");
    }
  }
}

double lyapunov_residual(const MimoReference& ref) {
  const Mat F = ref.A_m + ref.L();
  const Mat P = ref.P();
  return (F.transpose() * P + P * F + ref.Q()).norm();
}

MimoMatch mimo_matched_gains(const MimoPlant& plant, const Mat& A_m) {
  plant.validate();
  if (A_m.rows() != plant.n() || A_m.cols() != plant.n()) {
    throw Error(ErrorKind::kInvalidConfig, "A_m must match the plant order");
  }
  const Mat BL = plant.B * plant.Lambda;
  MimoMatch m;
  m.Theta_star = BL.completeOrthogonalDecomposition().solve(A_m - plant.A);
  m.residual = (plant.A + BL * m.Theta_star - A_m).norm();
  if (!(m.residual < 1e-9)) {
    throw Error(ErrorKind::kNoMatch,
                "no Theta* satisfies A + B Lambda Theta* = A_m (residual " +
                    format_double(m.residual) + ")");
  }
  m.K_star = plant.Lambda.inverse();
  return m;
}

double mimo_lyapunov(const Vec& e, const Mat& Theta, const Mat& K,
                     const MimoPlant& plant, const MimoAdaptation& adapt,
                     const MimoMatch& truth) {
  const Mat dT = Theta - truth.Theta_star;
  const Mat dK = K - truth.K_star;
  return 0.5 * e.squaredNorm() +
         ((dT.transpose() * plant.Lambda * dT).trace() +
          (dK.transpose() * plant.Lambda * dK).trace()) /
             adapt.gamma;
}

Mat matrix_exponential(const Mat& M) { return M.exp(); }

DecayEnvelope decay_envelope(const Mat& A_m, int samples) {
  const double alpha = max_real_eig(A_m);
  if (!(alpha < 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "decay envelope needs a Hurwitz matrix");
  }
  DecayEnvelope env;
  env.a2 = 0.9 * std::abs(alpha);
  env.a1 = 0.0;
  const double horizon = 20.0 / env.a2;
  for (int i = 0; i < samples; ++i) {
    const double t = horizon * i / (samples - 1);
    env.a1 = std::max(env.a1, spectral_norm(matrix_exponential(A_m * t)) * std::exp(env.a2 * t));
  }
  return env;
}

bool verify_decay_envelope(const Mat& A_m, const DecayEnvelope& env, int samples) {
  const double horizon = 20.0 / env.a2;
  for (int i = 0; i < samples; ++i) {
    const double t = horizon * i / (samples - 1);
    const double lhs = spectral_norm(matrix_exponential(A_m * t));
    const double rhs = env.a1 * std::exp(-env.a2 * t);
    if (lhs > rhs * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

void MimoScenario::validate() const {
  plant.validate();
  ref.validate(plant.n());
  if (!(adapt.gamma > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "adaptation.gamma must be > 0");
  }
  if (static_cast<Eigen::Index>(inputs.size()) != plant.m()) {
    throw Error(ErrorKind::kInvalidConfig,
                "need one reference input per plant input (" + std::to_string(plant.m()) + ")");
  }
  for (const auto& r : inputs) r.validate();
  if (x_p0.size() != plant.n() || x_m0.size() != plant.n()) {
    throw Error(ErrorKind::kInvalidConfig, "initial states must have length n");
  }
  const Mat T0 = theta0();
  const Mat K0 = k0();
  if (T0.rows() != plant.m() || T0.cols() != plant.n()) {
    throw Error(ErrorKind::kInvalidConfig, "adaptation.Theta0 must be m x n");
  }
  if (K0.rows() != plant.m() || K0.cols() != plant.m()) {
    throw Error(ErrorKind::kInvalidConfig, "adaptation.K0 must be m x m");
  }
  const MimoMatch m = truth();
  const auto check_ball = [](const std::optional<ProjectionSet>& set, const Mat& star,
                             const Mat& init, const char* what) {
    if (!set) return;
    set->validate();
    if (star.norm() > set->theta_bound) {
      throw Error(ErrorKind::kInvalidConfig, std::string(what) +
                                                 " projection radius does not contain the matched gain");
    }
    if (init.norm() > set->theta_bound + 1e-9) {
      throw Error(ErrorKind::kInvalidConfig,
                  std::string(what) + " initial value lies outside the projection set");
    }
  };
  check_ball(adapt.theta_projection, m.Theta_star, T0, "Theta");
  check_ball(adapt.k_projection, m.K_star, K0, "K");
  integrator.validate();
  check_fixed_step_rule(integrator, std::max(adapt.gamma, std::abs(ref.g)));
}

Mat MimoScenario::theta0() const {
  return adapt.Theta0.size() ? adapt.Theta0 : Mat::Zero(plant.m(), plant.n());
}

Mat MimoScenario::k0() const {
  return adapt.K0.size() ? adapt.K0 : Mat::Identity(plant.m(), plant.m());
}

Vec MimoScenario::input(double t) const {
  Vec r(static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) r[static_cast<Eigen::Index>(i)] = inputs[i](t);
  return r;
}

double MimoScenario::input_sup() const {
  double s = 0.0;
  for (const auto& r : inputs) s += r.sup_norm() * r.sup_norm();
  return std::sqrt(s);
}

double MimoScenario::initial_lyapunov() const {
  return mimo_lyapunov(x_p0 - x_m0, theta0(), k0(), plant, adapt, truth());
}

MimoCrmLoop::MimoCrmLoop(const MimoScenario& scenario)
    : s_(scenario), truth_(scenario.truth()), L_(scenario.ref.L()) {
  s_.validate();
  n_ = s_.plant.n();
  m_ = s_.plant.m();
  BL_ = s_.plant.B * s_.plant.Lambda;
  off_theta_ = 3 * n_;
  off_k_ = off_theta_ + m_ * n_;
  off_int_ = off_k_ + m_ * m_;
  size_ = off_int_ + 3;
}

Mat MimoCrmLoop::Theta(const Vec& x) const {
  return unflatten(x.segment(off_theta_, m_ * n_), m_, n_);
}

Mat MimoCrmLoop::K(const Vec& x) const {
  return unflatten(x.segment(off_k_, m_ * m_), m_, m_);
}

void MimoCrmLoop::rhs(double t, const Vec& x, Vec& dxdt) const {
  const Vec r = s_.input(t);
  const Vec xp = x_p(x);
  const Vec xm = x_m(x);
  const Vec e = xp - xm;
  const Mat Th = Theta(x);
  const Mat Kx = K(x);
  const Vec u = Th * xp + Kx * r;

  // -Γ Bᵀ P e = -(γ/2) Bᵀ e.
  const Vec s = -0.5 * s_.adapt.gamma * (s_.plant.B.transpose() * e);
  const Mat theta_dot = project_matrix(s * xp.transpose(), Th, s_.adapt.theta_projection);
  const Mat k_dot = project_matrix(s * r.transpose(), Kx, s_.adapt.k_projection);

  dxdt.resize(size_);
  dxdt.segment(0, n_) = s_.plant.A * xp + BL_ * u;
  dxdt.segment(n_, n_) = s_.ref.A_m * xm + s_.plant.B * r - L_ * e;
  dxdt.segment(2 * n_, n_) = s_.ref.A_m * x_m_o(x) + s_.plant.B * r;
  dxdt.segment(off_theta_, m_ * n_) = flatten(theta_dot);
  dxdt.segment(off_k_, m_ * m_) = flatten(k_dot);
  dxdt[off_int_] = e.squaredNorm();
  dxdt[off_int_ + 1] = theta_dot.squaredNorm();
  dxdt[off_int_ + 2] = k_dot.squaredNorm();
}

VectorField MimoCrmLoop::vector_field() const {
  return [loop = *this](double t, const Vec& x, Vec& dxdt) { loop.rhs(t, x, dxdt); };
}

Vec MimoCrmLoop::initial_state() const {
  Vec x0 = Vec::Zero(size_);
  x0.segment(0, n_) = s_.x_p0;
  x0.segment(n_, n_) = s_.x_m0;
  x0.segment(2 * n_, n_) = s_.x_m0;
  x0.segment(off_theta_, m_ * n_) = flatten(s_.theta0());
  x0.segment(off_k_, m_ * m_) = flatten(s_.k0());
  return x0;
}

double MimoCrmLoop::lyapunov(const Vec& x) const {
  return mimo_lyapunov(x_p(x) - x_m(x), Theta(x), K(x), s_.plant, s_.adapt, truth_);
}

Trajectory simulate_mimo(const MimoScenario& scenario) {
  const MimoCrmLoop loop(scenario);
  const StateHistory hist =
      integrate_states(loop.vector_field(), loop.initial_state(), scenario.integrator);
  const Eigen::Index n = scenario.plant.n();
  const Eigen::Index m = scenario.plant.m();

  std::vector<std::string> names;
  for (const char* prefix : {"x_p_", "x_m_", "x_m_o_", "e_"}) {
    for (Eigen::Index i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      names.push_back("Theta_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      names.push_back("K_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
  }
  for (const char* extra : {"V", "e_norm", "int_e2", "int_Theta_dot2", "int_K_dot2"}) {
    names.push_back(extra);
  }

  std::ostringstream meta;
  meta << scenario.name << "; " << scenario.integrator.describe();
  Trajectory traj(names, meta.str());
  std::vector<double> row;
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    const Vec& x = hist.states[k];
    row.clear();
    const Vec e = loop.x_p(x) - loop.x_m(x);
    for (const Vec& part : {loop.x_p(x), loop.x_m(x), loop.x_m_o(x), e}) {
      row.insert(row.end(), part.data(), part.data() + part.size());
    }
    const Vec th = flatten(loop.Theta(x));
    const Vec kk = flatten(loop.K(x));
    row.insert(row.end(), th.data(), th.data() + th.size());
    row.insert(row.end(), kk.data(), kk.data() + kk.size());
    row.push_back(loop.lyapunov(x));
    row.push_back(e.norm());
    row.push_back(loop.int_e2(x));
    row.push_back(loop.int_theta_dot2(x));
    row.push_back(loop.int_k_dot2(x));
    traj.append(hist.times[k], row);
  }
  return traj;
}

MimoCertification certify_mimo_run(const Trajectory& traj, const MimoScenario& s,
                                   double t2) {
  if (!s.adapt.theta_projection || !s.adapt.k_projection) {
    throw Error(ErrorKind::kPreconditionViolated,
                "MIMO certificates require projection on Theta and K");
  }
  const double g = std::abs(s.ref.g);
  const double gamma = s.adapt.gamma;
  if (std::abs(gamma - g) > 1e-12 * std::max(1.0, g)) {
    throw Error(ErrorKind::kPreconditionViolated, "MIMO certificates require gamma = |g|");
  }
  if (!(t2 > 0.0) || t2 >= traj.back_time()) {
    throw Error(ErrorKind::kPreconditionViolated, "t2 must lie inside the run");
  }
  if (std::exp(-g * t2) > 1.0 / std::sqrt(g)) {
    throw Error(ErrorKind::kPreconditionViolated,
                "g=" + format_double(s.ref.g) + " exceeds g* for t2=" + format_double(t2));
  }
  for (const char* c : {"V", "e_norm", "int_e2", "int_Theta_dot2", "int_K_dot2"}) {
    if (!traj.has_channel(c)) {
      throw Error(ErrorKind::kMissingChannel, std::string("trajectory lacks channel '") + c + "'");
    }
  }

  const auto& t = traj.times();
  const auto& v = traj.channel("V");
  const auto& ie = traj.channel("int_e2");
  const Eigen::Index n = s.plant.n();
  const double allowance = 10.0 * s.integrator.record_dt * s.integrator.record_dt;
  const double V0 = s.initial_lyapunov();
  const double e0 = (s.x_p0 - s.x_m0).norm();
  const double lb = s.plant.lambda_bar;
  const double tm = s.adapt.theta_projection->theta_max();
  const double km = s.adapt.k_projection->theta_max();
  const double T = traj.back_time();

  MimoCertification out;
  auto& certs = out.certificates;
  certs.push_back(make_certificate("e_L2", ie.back(), V0 / g, allowance));

  double worst_inc = 0.0, worst_diss = -INFINITY;
  for (std::size_t k = 1; k < v.size(); ++k) {
    worst_inc = std::max(worst_inc, v[k] - v[k - 1]);
    worst_diss = std::max(worst_diss, v[k] - v[k - 1] + g * (ie[k] - ie[k - 1]));
  }
  BoundCertificate inc = make_certificate("V_nonincreasing", worst_inc, 1e-8);
  inc.pass = worst_inc <= 1e-8;
  certs.push_back(inc);
  BoundCertificate diss = make_certificate("V_dissipation", worst_diss, 1e-7);
  diss.pass = worst_diss <= 1e-7;
  diss.note = "max of V(t_k+1) - V(t_k) + |g| ∫‖e‖² over the step";
  certs.push_back(diss);

  const double offset = lb / gamma * (tm * tm + km * km);
  std::vector<double> env(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    env[k] = 0.5 * e0 * e0 * std::exp(-2.0 * g * t[k]) + offset;
  }
  certs.push_back(envelope_certificate("V_gronwall_envelope", t, v, env));

  const double tail = sample_at(traj, "int_e2", T) - sample_at(traj, "int_e2", t2);
  const double remainder = traj.channel("e_norm").back() * traj.channel("e_norm").back() / (2.0 * g);
  certs.push_back(make_certificate(
      "e_tail_L2", std::sqrt(std::max(0.0, tail + remainder)),
      e0 / (std::sqrt(2.0) * g) + std::sqrt(lb * (tm * tm + km * km) / (gamma * g)), 0.0,
      "includes remainder estimate " + format_double(remainder)));

  out.envelope = decay_envelope(s.ref.A_m);
  const double a1 = out.envelope.a1;
  const double a2 = out.envelope.a2;
  const double Lnorm = spectral_norm(s.ref.L());
  double xmo_sup = 0.0;
  std::vector<double> xm_norm2(t.size(), 0.0);
  Vec xm_t2 = Vec::Zero(n), xmo_t2 = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string idx = std::to_string(i + 1);
    const auto& xm = traj.channel("x_m_" + idx);
    xm_t2[i] = sample_at(traj, "x_m_" + idx, t2);
    xmo_t2[i] = sample_at(traj, "x_m_o_" + idx, t2);
    for (std::size_t k = 0; k < t.size(); ++k) xm_norm2[k] += xm[k] * xm[k];
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    double xo = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = traj.channel("x_m_o_" + std::to_string(i + 1))[k];
      xo += c * c;
    }
    xmo_sup = std::max(xmo_sup, std::sqrt(xo));
  }
  const std::size_t i2 = traj.lower_index(t2 - 1e-12);
  const double forced = Lnorm * Lnorm * a1 * a1 / a2 *
                        (e0 * e0 / (g * g) + 2.0 * lb * (tm * tm + km * km) / (gamma * g));
  std::vector<double> xm_env(t.size(), 0.0);
  for (std::size_t k = i2; k < t.size(); ++k) {
    const double c5 = xmo_sup + (xm_t2.norm() + xmo_t2.norm()) * a1 * std::exp(-a2 * (t[k] - t2));
    xm_env[k] = 2.0 * c5 * c5 + forced;
  }
  for (std::size_t k = 0; k < i2; ++k) xm_norm2[k] = 0.0;
  certs.push_back(envelope_certificate("xm_tail_envelope", t, xm_norm2, xm_env, i2));

  const double r_sup = s.input_sup();
  const double kdot_tail = sample_at(traj, "int_K_dot2", T) - sample_at(traj, "int_K_dot2", t2);
  certs.push_back(make_certificate("Kdot_tail_L2", kdot_tail,
                                   spectral_norm(s.plant.B) * (e0 * e0 + km * km + tm * tm) *
                                       r_sup * r_sup,
                                   allowance));

  out.measurements.push_back(
      {"Thetadot_tail_L2",
       sample_at(traj, "int_Theta_dot2", T) - sample_at(traj, "int_Theta_dot2", t2),
       "trend only"});
  out.measurements.push_back({"lyapunov_residual", lyapunov_residual(s.ref), ""});
  out.measurements.push_back({"decay_a1", a1, ""});
  out.measurements.push_back({"decay_a2", a2, ""});
  out.measurements.push_back({"matching_residual", s.truth().residual, ""});
  return out;
}

MimoScenario mimo_demo_scenario(double gamma) {
  MimoScenario s;
  s.name = "mimo-demo";
  s.plant.A.resize(2, 2);
  s.plant.A << 0, 1, -1, -2;
  s.plant.B.resize(2, 1);
  s.plant.B << 0, 1;
  s.plant.Lambda = Mat::Identity(1, 1);
  s.plant.lambda_bar = 1.0;
  s.ref.A_m.resize(2, 2);
  s.ref.A_m << 0, 1, -4, -4;
  s.ref.g = -gamma;
  s.adapt.gamma = gamma;
  s.adapt.theta_projection = ProjectionSet{5.0, 0.1};
  s.adapt.k_projection = ProjectionSet{2.0, 0.1};
  s.inputs = {ReferenceInput{}};
  s.x_p0 = Vec::Zero(2);
  s.x_m0 = Vec::Zero(2);
  return s;
}

}  // namespace crmlab
