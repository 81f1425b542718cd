#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "psgdwa/harness.hpp"

namespace psgdwa {

/// Invalid configuration. The message starts with the dotted key at fault.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& message);
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses a JSON experiment description. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);

/// Reads `path`, applies `key.path=value` overrides, then parses. Values
/// are read as JSON when they parse as JSON, otherwise as strings.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides = {});
ExperimentConfig parse_config(std::string_view json_text,
                              std::span<const std::string> overrides);

/// Canonical JSON form; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

}  // namespace psgdwa
