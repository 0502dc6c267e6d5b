#include "survtrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <stdexcept>

namespace survtrack {

const char* to_string(ConfigOrigin origin) {
  switch (origin) {
    case ConfigOrigin::builtin:
      return "default";
    case ConfigOrigin::file:
      return "file";
    case ConfigOrigin::sequence:
      return "sequence";
    case ConfigOrigin::flag:
      return "flag";
  }
  return "?";
}

namespace {

std::vector<double> numbers(const std::string& key, const std::string& value, std::size_t count) {
  std::vector<double> v;
  try {
    v = parse_number_list(value, key);
  } catch (const IniError& e) {
    throw std::invalid_argument(e.what());
  }
  if (v.size() != count) {
    throw std::invalid_argument(key + ": expected " + std::to_string(count) + " comma-separated numbers, got '" +
                                value + "'");
  }
  return v;
}

double real(const std::string& key, const std::string& value) { return numbers(key, value, 1)[0]; }

int integer(const std::string& key, const std::string& value) {
  const double v = real(key, value);
  if (v != static_cast<double>(static_cast<long long>(v)) || std::abs(v) > 1e9) {
    throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
  }
  return static_cast<int>(v);
}

bool boolean(const std::string& key, std::string value) {
  std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); });
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + value + "'");
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <typename Vec>
std::string show_list(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + show(v[i]);
  return out;
}

template <typename Vec>
void assign(Vec& dst, const std::vector<double>& src) {
  for (Eigen::Index i = 0; i < dst.size(); ++i) dst[i] = src[static_cast<std::size_t>(i)];
}

struct Field {
  std::function<void(TrackerConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const TrackerConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"association.alpha",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.weights.alpha = real(k, v); },
        [](const TrackerConfig& c) { return show(c.weights.alpha); }}},
      {"association.beta",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.weights.beta = real(k, v); },
        [](const TrackerConfig& c) { return show(c.weights.beta); }}},
      {"association.gate",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.weights.gate = real(k, v); },
        [](const TrackerConfig& c) { return show(c.weights.gate); }}},
      {"tracker.timeout",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.timeout = integer(k, v); },
        [](const TrackerConfig& c) { return std::to_string(c.timeout); }}},
      {"tracker.buffer",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.buffer = integer(k, v); },
        [](const TrackerConfig& c) { return std::to_string(c.buffer); }}},
      {"tracker.min_confidence",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.min_confidence = real(k, v); },
        [](const TrackerConfig& c) { return show(c.min_confidence); }}},
      {"tracker.report_coasting",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.report_coasting = boolean(k, v); },
        [](const TrackerConfig& c) { return std::string(c.report_coasting ? "true" : "false"); }}},
      {"fingerprint.dimension",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.fingerprint_dim = integer(k, v); },
        [](const TrackerConfig& c) { return std::to_string(c.fingerprint_dim); }}},
      {"kalman.measurement_weight",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) {
          assign(c.noise.measurement_weight, numbers(k, v, 4));
        },
        [](const TrackerConfig& c) { return show_list(c.noise.measurement_weight); }}},
      {"kalman.process_weight",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) {
          assign(c.noise.process_weight, numbers(k, v, 8));
        },
        [](const TrackerConfig& c) { return show_list(c.noise.process_weight); }}},
      {"kalman.initial_weight",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) {
          assign(c.noise.initial_weight, numbers(k, v, 8));
        },
        [](const TrackerConfig& c) { return show_list(c.noise.initial_weight); }}},
      {"image.width",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.geometry.width = real(k, v); },
        [](const TrackerConfig& c) { return show(c.geometry.width); }}},
      {"image.height",
       {[](TrackerConfig& c, const std::string& k, const std::string& v) { c.geometry.height = real(k, v); },
        [](const TrackerConfig& c) { return show(c.geometry.height); }}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, field] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void ResolvedConfig::set(const std::string& key, const std::string& value, ConfigOrigin from) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second.set(tracker, key, value);
  origin[key] = from;
}

ConfigOrigin ResolvedConfig::origin_of(const std::string& key) const {
  const auto it = origin.find(key);
  return it == origin.end() ? ConfigOrigin::builtin : it->second;
}

std::vector<std::pair<std::string, std::string>> ResolvedConfig::values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(tracker));
  return out;
}

std::string ResolvedConfig::audit() const {
  std::string out;
  for (const auto& [key, value] : values()) {
    const ConfigOrigin from = origin_of(key);
    char line[160];
    std::snprintf(line, sizeof line, "  %-26s = %-40s (%s)\n", key.c_str(), value.c_str(), to_string(from));
    out += line;
  }
  return out;
}

ResolvedConfig resolve_config(const IniDocument* doc) {
  ResolvedConfig cfg;
  if (!doc) return cfg;
  for (const std::string& section : doc->sections()) {
    for (const auto& [key, value] : doc->section(section)) {
      const std::string full = section + "." + key;
      try {
        cfg.set(full, value, ConfigOrigin::file);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(doc->source() + ": " + e.what());
      }
    }
  }
  return cfg;
}

}  // namespace survtrack
