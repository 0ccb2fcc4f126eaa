#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace crmlab {

using Json = nlohmann::ordered_json;

// Serializes with every floating-point number printed as "%.17g". Non-finite
// numbers become null.
std::string dump_json(const Json& value, int indent = 2);

// Writes to a sibling temporary file, then renames over `path`. Creates the
// parent directory. Throws InvalidConfig on I/O failure.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

}  // namespace crmlab
