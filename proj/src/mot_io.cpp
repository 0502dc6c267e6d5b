#include "survtrack/mot_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "survtrack/ini.hpp"

namespace survtrack {

MotParseError::MotParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
    : MotIoError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MotIoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Calls `fn(line_no, fields)` for every non-blank line. Accepts \n and \r\n.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    fn(line_no, fields);
  }
}

double number(std::string_view field, const std::string& source, std::size_t line, std::size_t column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw MotParseError(source, line, column, "malformed number '" + std::string(field) + "'");
  }
  return value;
}

int integer(std::string_view field, const std::string& source, std::size_t line, std::size_t column) {
  const double v = number(field, source, line, column);
  if (v != static_cast<double>(static_cast<long long>(v)) || v < -2147483648.0 || v > 2147483647.0) {
    throw MotParseError(source, line, column, "expected an integer, found '" + std::string(field) + "'");
  }
  return static_cast<int>(v);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MotIoError("cannot write " + path.string());
  out << text;
  if (!out) throw MotIoError("failed writing " + path.string());
}

// Renders with two decimals and folds "-0.00" into "0.00".
void append_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string_view s(buf);
  if (s == "-0.00") s = "0.00";
  out += s;
}

void append_general(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  out += buf;
}

}  // namespace

FrameMap<DetectionRecord> parse_detections(std::string_view text, const std::string& source) {
  FrameMap<DetectionRecord> out;
  for_each_record(text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 10) {
      throw MotParseError(source, line, std::min<std::size_t>(f.size() + 1, 10),
                          "expected 10 fields, found " + std::to_string(f.size()));
    }
    DetectionRecord r;
    r.frame = integer(f[0], source, line, 1);
    if (r.frame < 1) throw MotParseError(source, line, 1, "frame numbers start at 1");
    r.id = integer(f[1], source, line, 2);
    r.box = {number(f[2], source, line, 3), number(f[3], source, line, 4), number(f[4], source, line, 5),
             number(f[5], source, line, 6)};
    r.confidence = number(f[6], source, line, 7);
    for (int k = 0; k < 3; ++k) r.extra[k] = number(f[7 + k], source, line, 8 + k);
    out[r.frame].push_back(r);
  });
  return out;
}

FrameMap<DetectionRecord> read_detections(const std::filesystem::path& path) {
  return parse_detections(slurp(path), path.string());
}

FrameMap<GroundTruthRecord> parse_ground_truth(std::string_view text, const std::string& source) {
  FrameMap<GroundTruthRecord> out;
  for_each_record(text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() < 6 || f.size() > 10) {
      throw MotParseError(source, line, std::min<std::size_t>(f.size() + 1, 11),
                          "expected 6 to 10 fields, found " + std::to_string(f.size()));
    }
    GroundTruthRecord r;
    r.frame = integer(f[0], source, line, 1);
    if (r.frame < 1) throw MotParseError(source, line, 1, "frame numbers start at 1");
    r.id = integer(f[1], source, line, 2);
    r.box = {number(f[2], source, line, 3), number(f[3], source, line, 4), number(f[4], source, line, 5),
             number(f[5], source, line, 6)};
    if (f.size() > 6) r.consider = number(f[6], source, line, 7) != 0.0;
    if (f.size() > 7) r.object_class = integer(f[7], source, line, 8);
    if (f.size() > 8) r.visibility = number(f[8], source, line, 9);
    out[r.frame].push_back(r);
  });
  return out;
}

FrameMap<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(slurp(path), path.string());
}

std::string format_result_line(int frame, int id, const Box& box) {
  std::string out = std::to_string(frame) + ',' + std::to_string(id) + ',';
  append_fixed(out, box.x);
  out += ',';
  append_fixed(out, box.y);
  out += ',';
  append_fixed(out, box.w);
  out += ',';
  append_fixed(out, box.h);
  out += ",1,-1,-1,-1";
  return out;
}

std::string format_results(std::span<const FrameResult> results) {
  std::string out;
  for (const FrameResult& fr : results) {
    for (const TrackReport& t : fr.tracks) {
      out += format_result_line(fr.frame, t.id, t.box);
      out += '\n';
    }
  }
  return out;
}

void write_results(const std::filesystem::path& path, std::span<const FrameResult> results) {
  write_text(path, format_results(results));
}

std::string format_detection_line(const DetectionRecord& r) {
  std::string out = std::to_string(r.frame) + ',' + std::to_string(r.id) + ',';
  append_fixed(out, r.box.x);
  out += ',';
  append_fixed(out, r.box.y);
  out += ',';
  append_fixed(out, r.box.w);
  out += ',';
  append_fixed(out, r.box.h);
  out += ',';
  append_general(out, r.confidence);
  for (double e : r.extra) {
    out += ',';
    append_general(out, e);
  }
  return out;
}

std::string format_ground_truth_line(const GroundTruthRecord& r) {
  std::string out = std::to_string(r.frame) + ',' + std::to_string(r.id) + ',';
  append_fixed(out, r.box.x);
  out += ',';
  append_fixed(out, r.box.y);
  out += ',';
  append_fixed(out, r.box.w);
  out += ',';
  append_fixed(out, r.box.h);
  out += r.consider ? ",1," : ",0,";
  out += std::to_string(r.object_class);
  out += ',';
  append_general(out, r.visibility);
  return out;
}

void write_detections(const std::filesystem::path& path, const FrameMap<DetectionRecord>& records) {
  std::string text;
  for (const auto& [frame, list] : records) {
    for (const auto& r : list) {
      text += format_detection_line(r);
      text += '\n';
    }
  }
  write_text(path, text);
}

void write_ground_truth(const std::filesystem::path& path, const FrameMap<GroundTruthRecord>& records) {
  std::string text;
  for (const auto& [frame, list] : records) {
    for (const auto& r : list) {
      text += format_ground_truth_line(r);
      text += '\n';
    }
  }
  write_text(path, text);
}

SequenceInfo read_sequence_info(const std::filesystem::path& path) {
  IniDocument doc;
  try {
    doc = IniDocument::read(path);
  } catch (const IniError& e) {
    throw MotIoError(e.what());
  }
  const std::string section = doc.section("Sequence").empty() ? "" : "Sequence";
  SequenceInfo info;
  try {
    if (auto v = doc.get(section, "name")) info.name = *v;
    if (auto v = doc.get(section, "imDir")) info.image_dir = *v;
    if (auto v = doc.get(section, "imExt")) info.image_ext = *v;
    if (auto v = doc.get_double(section, "frameRate")) info.frame_rate = *v;
    if (auto v = doc.get_int(section, "seqLength")) info.length = static_cast<int>(*v);
    if (auto v = doc.get_int(section, "imWidth")) info.width = static_cast<int>(*v);
    if (auto v = doc.get_int(section, "imHeight")) info.height = static_cast<int>(*v);
  } catch (const IniError& e) {
    throw MotIoError(e.what());
  }
  if (info.width <= 0 || info.height <= 0) {
    throw MotIoError(path.string() + ": imWidth and imHeight must be positive");
  }
  return info;
}

void write_sequence_info(const std::filesystem::path& path, const SequenceInfo& info) {
  std::ostringstream out;
  out << "[Sequence]\n"
      << "name=" << info.name << '\n'
      << "imDir=" << info.image_dir << '\n'
      << "frameRate=" << info.frame_rate << '\n'
      << "seqLength=" << info.length << '\n'
      << "imWidth=" << info.width << '\n'
      << "imHeight=" << info.height << '\n'
      << "imExt=" << info.image_ext << '\n';
  write_text(path, out.str());
}

std::filesystem::path frame_image_path(const std::filesystem::path& sequence_dir, const SequenceInfo& info, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d", frame);
  return sequence_dir / info.image_dir / (std::string(name) + info.image_ext);
}

std::optional<Image> load_frame_image(const std::filesystem::path& sequence_dir, const SequenceInfo& info, int frame) {
  if (frame < 1 || (info.length > 0 && frame > info.length)) return std::nullopt;
  const auto path = frame_image_path(sequence_dir, info, frame);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    return read_image(path);
  } catch (const ImageError& e) {
    throw MotIoError(e.what());
  }
}

}  // namespace survtrack
