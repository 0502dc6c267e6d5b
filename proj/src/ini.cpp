#include "survtrack/ini.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace survtrack {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

const std::map<std::string, std::string> kEmptySection;

}  // namespace

IniDocument IniDocument::parse(std::string_view text, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw IniError(source + ":" + std::to_string(line_no) + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(doc.order_.begin(), doc.order_.end(), section) == doc.order_.end()) doc.order_.push_back(section);
      doc.values_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw IniError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw IniError(source + ":" + std::to_string(line_no) + ": empty key");
    if (std::find(doc.order_.begin(), doc.order_.end(), section) == doc.order_.end()) doc.order_.push_back(section);
    doc.values_[section][key] = std::string(trim(line.substr(eq + 1)));
  }
  return doc;
}

IniDocument IniDocument::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IniError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::optional<std::string> IniDocument::get(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::optional<double> IniDocument::get_double(const std::string& section, const std::string& key) const {
  const auto raw = get(section, key);
  if (!raw) return std::nullopt;
  const auto v = parse_number<double>(*raw);
  if (!v) throw IniError(source_ + ": " + section + "." + key + " is not a number: '" + *raw + "'");
  return v;
}

std::optional<long long> IniDocument::get_int(const std::string& section, const std::string& key) const {
  const auto raw = get(section, key);
  if (!raw) return std::nullopt;
  const auto v = parse_number<long long>(*raw);
  if (!v) throw IniError(source_ + ": " + section + "." + key + " is not an integer: '" + *raw + "'");
  return v;
}

std::optional<bool> IniDocument::get_bool(const std::string& section, const std::string& key) const {
  const auto raw = get(section, key);
  if (!raw) return std::nullopt;
  std::string v = *raw;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw IniError(source_ + ": " + section + "." + key + " is not a boolean: '" + *raw + "'");
}

void IniDocument::set(const std::string& section, const std::string& key, std::string value) {
  if (std::find(order_.begin(), order_.end(), section) == order_.end()) order_.push_back(section);
  values_[section][key] = std::move(value);
}

const std::map<std::string, std::string>& IniDocument::section(const std::string& name) const {
  const auto s = values_.find(name);
  return s == values_.end() ? kEmptySection : s->second;
}

std::vector<double> parse_number_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto v = parse_number<double>(item);
    if (!v) throw IniError(what + ": malformed number '" + std::string(trim(item)) + "'");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace survtrack
