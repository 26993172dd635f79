#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pulsediff::cli {

/// Thrown for malformed or unknown configuration; reported as `ERROR config`.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every accepted key with its default value.
nlohmann::json default_config();

/// Defaults, then the optional JSON file, then `key.path=value` overrides.
/// Override values are parsed as JSON when possible and as plain strings
/// otherwise. Unknown keys and type changes are rejected.
nlohmann::json load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

/// Applies `patch` to `base` in place, checking keys against base.
void merge_checked(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix = "");

}  // namespace pulsediff::cli
