#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace fvdg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by run and problem files: comments, bare or
/// quoted keys (dotted allowed), [table] and [a.b] headers, strings, numbers,
/// booleans, arrays and inline tables.
nlohmann::json parse_toml(const std::string& text);

/// Reads a .json file as JSON and anything else as TOML.
nlohmann::json load_config_file(const std::filesystem::path& path);

}  // namespace fvdg
