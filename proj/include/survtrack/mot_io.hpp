#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "survtrack/geometry.hpp"
#include "survtrack/image.hpp"
#include "survtrack/tracker.hpp"

namespace survtrack {

class MotIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed record; carries the 1-based line and column (field) number.
class MotParseError : public MotIoError {
 public:
  MotParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct DetectionRecord {
  int frame = 0;
  int id = -1;
  Box box;
  double confidence = 1.0;
  std::array<double, 3> extra{-1.0, -1.0, -1.0};
};

struct GroundTruthRecord {
  int frame = 0;
  int id = 0;
  Box box;
  bool consider = true;
  int object_class = -1;
  double visibility = -1.0;
};

template <typename Record>
using FrameMap = std::map<int, std::vector<Record>>;

/// Comma-separated `frame,id,x,y,w,h,conf,a,b,c`; exactly ten fields.
FrameMap<DetectionRecord> parse_detections(std::string_view text, const std::string& source = "<memory>");
FrameMap<DetectionRecord> read_detections(const std::filesystem::path& path);

/// `frame,id,x,y,w,h[,consider[,class[,visibility[,unused]]]]`; reads both
/// ground-truth files and tracker result files.
FrameMap<GroundTruthRecord> parse_ground_truth(std::string_view text, const std::string& source = "<memory>");
FrameMap<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path);

/// `frame,id,x,y,w,h,1,-1,-1,-1` with two-decimal coordinates.
std::string format_result_line(int frame, int id, const Box& box);
std::string format_results(std::span<const FrameResult> results);
void write_results(const std::filesystem::path& path, std::span<const FrameResult> results);

std::string format_detection_line(const DetectionRecord& r);
std::string format_ground_truth_line(const GroundTruthRecord& r);
void write_detections(const std::filesystem::path& path, const FrameMap<DetectionRecord>& records);
void write_ground_truth(const std::filesystem::path& path, const FrameMap<GroundTruthRecord>& records);

/// Contents of a sequence's seqinfo.ini.
struct SequenceInfo {
  std::string name = "sequence";
  std::string image_dir = "img1";
  std::string image_ext = ".jpg";
  double frame_rate = 30.0;
  int length = 0;
  int width = 0;
  int height = 0;

  ImageGeometry<double> geometry() const { return {static_cast<double>(width), static_cast<double>(height)}; }
};

SequenceInfo read_sequence_info(const std::filesystem::path& path);
void write_sequence_info(const std::filesystem::path& path, const SequenceInfo& info);

/// `<dir>/<image_dir>/<frame:06d><image_ext>`.
std::filesystem::path frame_image_path(const std::filesystem::path& sequence_dir, const SequenceInfo& info, int frame);

/// Decoded frame, or nullopt when the directory or file does not exist (a
/// geometry-only run). A file that exists but fails to decode is an error.
std::optional<Image> load_frame_image(const std::filesystem::path& sequence_dir, const SequenceInfo& info, int frame);

}  // namespace survtrack
