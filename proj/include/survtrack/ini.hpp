#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace survtrack {

class IniError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines grouped under `[section]` headers. Keys before the
/// first header live in section "". Lines starting with '#' or ';' are
/// comments. Section order is preserved for scenario files.
class IniDocument {
 public:
  static IniDocument parse(std::string_view text, const std::string& source = "<memory>");
  static IniDocument read(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  /// Typed lookup; throws IniError naming section.key on a malformed value.
  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<long long> get_int(const std::string& section, const std::string& key) const;
  std::optional<bool> get_bool(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, std::string value);

  const std::vector<std::string>& sections() const { return order_; }
  const std::map<std::string, std::string>& section(const std::string& name) const;

  std::string source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Splits "1, 2.5,3" into numbers; throws IniError on a malformed item.
std::vector<double> parse_number_list(std::string_view text, const std::string& what);

}  // namespace survtrack
