#include "survtrack/fingerprint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace survtrack {

Patch Patch::filled(PatchShape shape, float value) {
  Patch p;
  for (auto& c : p.channels) c = Eigen::ArrayXXf::Constant(shape.height, shape.width, value);
  return p;
}

Patch extract_patch(const Image& frame, const Box& box, PatchShape shape) {
  if (shape.height <= 0 || shape.width <= 0) throw FingerprintError("patch shape must be positive");
  if (frame.empty()) throw FingerprintError("no image to extract a patch from");
  const Box image_rect{0.0, 0.0, static_cast<double>(frame.width()), static_cast<double>(frame.height())};
  if (!(intersection(box, image_rect).area() > 0.0)) {
    throw FingerprintError("detection box lies outside the image");
  }

  Patch patch = Patch::filled(shape, 0.0f);
  const double sx = box.w / shape.width;
  const double sy = box.h / shape.height;
  const int max_col = frame.width() - 1;
  const int max_row = frame.height() - 1;
  constexpr float kScale = 1.0f / 255.0f;

  // Column sampling positions are shared by every row.
  std::vector<int> c0(shape.width), c1(shape.width);
  std::vector<float> fx(shape.width);
  std::vector<bool> col_inside(shape.width);
  for (int j = 0; j < shape.width; ++j) {
    const double pos = box.x + (j + 0.5) * sx;  // continuous image coordinate
    col_inside[j] = pos >= 0.0 && pos < frame.width();
    const double idx = std::clamp(pos - 0.5, 0.0, static_cast<double>(max_col));
    c0[j] = static_cast<int>(idx);
    c1[j] = std::min(c0[j] + 1, max_col);
    fx[j] = static_cast<float>(idx - c0[j]);
  }

  for (int i = 0; i < shape.height; ++i) {
    const double pos = box.y + (i + 0.5) * sy;
    if (!(pos >= 0.0 && pos < frame.height())) continue;
    const double idx = std::clamp(pos - 0.5, 0.0, static_cast<double>(max_row));
    const int r0 = static_cast<int>(idx);
    const int r1 = std::min(r0 + 1, max_row);
    const float fy = static_cast<float>(idx - r0);
    const std::uint8_t* top = frame.row_ptr(r0);
    const std::uint8_t* bottom = frame.row_ptr(r1);
    for (int j = 0; j < shape.width; ++j) {
      if (!col_inside[j]) continue;
      const std::size_t a = static_cast<std::size_t>(c0[j]) * 3;
      const std::size_t b = static_cast<std::size_t>(c1[j]) * 3;
      for (int ch = 0; ch < 3; ++ch) {
        const float upper = top[a + ch] + fx[j] * (top[b + ch] - top[a + ch]);
        const float lower = bottom[a + ch] + fx[j] * (bottom[b + ch] - bottom[a + ch]);
        patch.channels[ch](i, j) = (upper + fy * (lower - upper)) * kScale;
      }
    }
  }
  return patch;
}

MaybeFingerprint make_fingerprint(Fingerprint values) {
  if (values.size() == 0 || !values.allFinite() || !(values.squaredNorm() > 0.0)) return std::nullopt;
  return values;
}

double fingerprint_cost(const MaybeFingerprint& a, const MaybeFingerprint& b) {
  if (!a || !b) return kNullFingerprintCost;
  return 1.0 - squared_cosine_similarity(*a, *b);
}

std::vector<MaybeFingerprint> FingerprintProvider::embed_batch(std::span<const Patch> patches) {
  std::vector<MaybeFingerprint> out(patches.size());
  if (patches.empty()) return out;
  ++batches_;
  evaluations_ += patches.size();
  try {
    for (std::size_t i = 0; i < patches.size(); ++i) {
      Fingerprint f = embed(patches[i]);
      if (f.size() != dimension()) throw FingerprintError("provider returned a fingerprint of the wrong size");
      out[i] = make_fingerprint(std::move(f));
    }
  } catch (const std::exception&) {
    for (auto& f : out) f.reset();
  }
  return out;
}

HistogramEmbedder::HistogramEmbedder(HistogramEmbedderOptions options) : options_(options) {
  if (options_.grid_rows <= 0 || options_.grid_cols <= 0 || options_.bins <= 0 || options_.dimension <= 0) {
    throw FingerprintError("histogram embedder options must be positive");
  }
}

Fingerprint HistogramEmbedder::embed(const Patch& patch) const {
  const int rows = options_.grid_rows;
  const int cols = options_.grid_cols;
  const int bins = options_.bins;
  const int raw_dim = rows * cols * 3 * bins;
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(raw_dim);

  const int h = patch.height();
  const int w = patch.width();
  for (int ch = 0; ch < 3; ++ch) {
    const auto& plane = patch.channels[ch];
    for (int i = 0; i < h; ++i) {
      const int cell_row = std::min(i * rows / h, rows - 1);
      for (int j = 0; j < w; ++j) {
        const int cell_col = std::min(j * cols / w, cols - 1);
        const int base = ((cell_row * cols + cell_col) * 3 + ch) * bins;
        // bin k is centered at (k + 0.5) / bins; mass is split linearly between
        // the two nearest centers
        const double t = std::clamp(static_cast<double>(plane(i, j)), 0.0, 1.0) * bins - 0.5;
        if (t <= 0.0) {
          raw(base) += 1.0;
        } else if (t >= bins - 1) {
          raw(base + bins - 1) += 1.0;
        } else {
          const int lo = static_cast<int>(t);
          const double frac = t - lo;
          raw(base + lo) += 1.0 - frac;
          raw(base + lo + 1) += frac;
        }
      }
    }
  }

  Fingerprint out = Fingerprint::Zero(options_.dimension);
  const int n = std::min(raw_dim, options_.dimension);
  out.head(n) = raw.head(n);
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

std::vector<FrameFingerprints> buffered_inference(std::span<const BufferedFrame> buffer,
                                                  FingerprintProvider& provider) {
  std::vector<Patch> batch;
  std::vector<std::pair<std::size_t, std::size_t>> owners;
  std::vector<FrameFingerprints> out;
  out.reserve(buffer.size());
  for (std::size_t f = 0; f < buffer.size(); ++f) {
    out.push_back({buffer[f].frame, std::vector<MaybeFingerprint>(buffer[f].patches.size())});
    for (std::size_t d = 0; d < buffer[f].patches.size(); ++d) {
      if (!buffer[f].patches[d]) continue;
      batch.push_back(*buffer[f].patches[d]);
      owners.emplace_back(f, d);
    }
  }
  auto fingerprints = provider.embed_batch(batch);
  for (std::size_t k = 0; k < owners.size(); ++k) {
    out[owners[k].first].fingerprints[owners[k].second] = std::move(fingerprints[k]);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, std::size_t column, const std::filesystem::path& path) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FingerprintError(path.string() + ":" + std::to_string(line) + ": malformed value in column " +
                           std::to_string(column));
  }
  return value;
}

}  // namespace

void FingerprintSidecar::insert(int frame, int det_index, Fingerprint values) {
  if (dimension_ == 0) dimension_ = static_cast<int>(values.size());
  if (values.size() != dimension_) throw FingerprintError("sidecar fingerprint dimension mismatch");
  entries_[{frame, det_index}] = std::move(values);
}

MaybeFingerprint FingerprintSidecar::lookup(int frame, int det_index) const {
  const auto it = entries_.find({frame, det_index});
  if (it == entries_.end()) return std::nullopt;
  return make_fingerprint(it->second);
}

FingerprintSidecar FingerprintSidecar::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FingerprintError("cannot open fingerprint sidecar: " + path.string());
  FingerprintSidecar sidecar;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (text.starts_with("#dim=")) {
        sidecar.dimension_ = parse_field<int>(text.substr(5), line_no, 1, path);
        if (sidecar.dimension_ <= 0) throw FingerprintError(path.string() + ": dimension must be positive");
        have_header = true;
      }
      continue;
    }
    if (!have_header) throw FingerprintError(path.string() + ": missing '#dim=F' header before data");
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      fields.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != static_cast<std::size_t>(sidecar.dimension_) + 2) {
      throw FingerprintError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(sidecar.dimension_ + 2) + " fields, found " +
                             std::to_string(fields.size()));
    }
    const int frame = parse_field<int>(fields[0], line_no, 1, path);
    const int det = parse_field<int>(fields[1], line_no, 2, path);
    Fingerprint values(sidecar.dimension_);
    for (int k = 0; k < sidecar.dimension_; ++k) values(k) = parse_field<double>(fields[k + 2], line_no, k + 3, path);
    sidecar.entries_[{frame, det}] = std::move(values);
  }
  return sidecar;
}

void FingerprintSidecar::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FingerprintError("cannot write fingerprint sidecar: " + path.string());
  out << "#dim=" << dimension_ << '\n';
  char buf[64];
  for (const auto& [key, values] : entries_) {
    out << key.first << ',' << key.second;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", values(k));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace survtrack
