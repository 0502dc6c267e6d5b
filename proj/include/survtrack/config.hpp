#pragma once

#include <map>
#include <string>
#include <vector>

#include "survtrack/ini.hpp"
#include "survtrack/tracker.hpp"

namespace survtrack {

/// `sequence` marks values taken from a sequence's seqinfo.ini.
enum class ConfigOrigin { builtin, file, sequence, flag };

const char* to_string(ConfigOrigin origin);

/// Effective tracker configuration plus, per key, where its value came from.
/// Keys are `section.name`, e.g. `association.alpha`.
struct ResolvedConfig {
  TrackerConfig tracker;
  std::map<std::string, ConfigOrigin> origin;

  /// Every key with its current value, in key order.
  std::vector<std::pair<std::string, std::string>> values() const;
  /// One `key = value  (origin)` line per key.
  std::string audit() const;

  /// Parses `value` for `key` and records `origin`. Throws std::invalid_argument
  /// for an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value, ConfigOrigin origin);
  ConfigOrigin origin_of(const std::string& key) const;
};

/// All keys accepted in a tracker config file.
const std::vector<std::string>& config_keys();

/// Built-in defaults overlaid with every key of `doc`. Unknown sections or
/// keys are rejected so that typos do not silently fall back to defaults.
ResolvedConfig resolve_config(const IniDocument* doc);

}  // namespace survtrack
