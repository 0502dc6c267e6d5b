#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace survtrack {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit interleaved RGB frame, row-major, as produced by an image decoder.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t& at(int row, int col, int channel) {
    return pixels_[(static_cast<std::size_t>(row) * width_ + col) * 3 + channel];
  }
  std::uint8_t at(int row, int col, int channel) const {
    return pixels_[(static_cast<std::size_t>(row) * width_ + col) * 3 + channel];
  }
  const std::uint8_t* row_ptr(int row) const { return pixels_.data() + static_cast<std::size_t>(row) * width_ * 3; }
  std::uint8_t* row_ptr(int row) { return pixels_.data() + static_cast<std::size_t>(row) * width_ * 3; }

  void fill(std::uint8_t value);
  /// Paints the pixels whose centers fall inside [x0, x1) x [y0, y1).
  void fill_rect(double x0, double y0, double x1, double y1, const std::uint8_t rgb[3]);

  std::vector<std::uint8_t>& data() { return pixels_; }
  const std::vector<std::uint8_t>& data() const { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary PPM (P6, maxval 255).
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Decodes by extension: .ppm always, .png with libpng, .jpg/.jpeg with libjpeg.
Image read_image(const std::filesystem::path& path);
/// Encodes by extension: .ppm always, .png with libpng.
void write_image(const std::filesystem::path& path, const Image& image);
bool jpeg_supported();
bool png_supported();

}  // namespace survtrack
