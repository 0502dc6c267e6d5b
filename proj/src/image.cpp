#include "survtrack/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#ifdef SURVTRACK_HAVE_PNG
#include <png.h>
#endif

#ifdef SURVTRACK_HAVE_JPEG
#include <csetjmp>
#include <jpeglib.h>
#endif

namespace survtrack {

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height * 3, fill) {
  if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
}

void Image::fill(std::uint8_t value) { std::fill(pixels_.begin(), pixels_.end(), value); }

void Image::fill_rect(double x0, double y0, double x1, double y1, const std::uint8_t rgb[3]) {
  // pixel (c, r) is covered when its center (c + 0.5, r + 0.5) lies inside
  const int c0 = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
  const int c1 = std::min(width_, static_cast<int>(std::ceil(x1 - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(y0 - 0.5)));
  const int r1 = std::min(height_, static_cast<int>(std::ceil(y1 - 0.5)));
  for (int r = r0; r < r1; ++r) {
    std::uint8_t* p = row_ptr(r) + static_cast<std::size_t>(c0) * 3;
    for (int c = c0; c < c1; ++c, p += 3) {
      p[0] = rgb[0];
      p[1] = rgb[1];
      p[2] = rgb[2];
    }
  }
}

namespace {

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.peek();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = -1;
  if (!(in >> value)) throw ImageError("corrupt PPM header: " + path.string());
  return value;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open image: " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P6") throw ImageError("not a binary PPM file: " + path.string());
  const int width = read_header_int(in, path);
  const int height = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  if (width <= 0 || height <= 0 || maxval != 255) throw ImageError("unsupported PPM layout: " + path.string());
  in.get();
  Image image(width, height);
  in.read(reinterpret_cast<char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(image.data().size())) {
    throw ImageError("truncated PPM pixel data: " + path.string());
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot write image: " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
  if (!out) throw ImageError("failed writing image: " + path.string());
}

#ifdef SURVTRACK_HAVE_JPEG
namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr info) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(info->err);
  std::longjmp(mgr->jump, 1);
}

Image read_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw ImageError("cannot open image: " + path.string());
  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  Image image;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw ImageError("corrupt JPEG file: " + path.string());
  }
  jpeg_create_decompress(&info);
  jpeg_stdio_src(&info, file.get());
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  image = Image(static_cast<int>(info.output_width), static_cast<int>(info.output_height));
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = image.row_ptr(static_cast<int>(info.output_scanline));
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return image;
}

}  // namespace
#endif

#ifdef SURVTRACK_HAVE_PNG
namespace {

Image read_png(const std::filesystem::path& path) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&info, path.c_str())) {
    throw ImageError("corrupt PNG file: " + path.string() + " (" + info.message + ")");
  }
  info.format = PNG_FORMAT_RGB;
  Image image(static_cast<int>(info.width), static_cast<int>(info.height));
  if (!png_image_finish_read(&info, nullptr, image.data().data(), 0, nullptr)) {
    png_image_free(&info);
    throw ImageError("corrupt PNG file: " + path.string() + " (" + info.message + ")");
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width());
  info.height = static_cast<png_uint_32>(image.height());
  info.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&info, path.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw ImageError("cannot write PNG file: " + path.string() + " (" + info.message + ")");
  }
}

}  // namespace
#endif

bool png_supported() {
#ifdef SURVTRACK_HAVE_PNG
  return true;
#else
  return false;
#endif
}

bool jpeg_supported() {
#ifdef SURVTRACK_HAVE_JPEG
  return true;
#else
  return false;
#endif
}

Image read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") return read_ppm(path);
#ifdef SURVTRACK_HAVE_PNG
  if (ext == ".png") return read_png(path);
#endif
#ifdef SURVTRACK_HAVE_JPEG
  if (ext == ".jpg" || ext == ".jpeg") return read_jpeg(path);
#endif
  throw ImageError("unsupported image format '" + ext + "': " + path.string());
}

void write_image(const std::filesystem::path& path, const Image& image) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") return write_ppm(path, image);
#ifdef SURVTRACK_HAVE_PNG
  if (ext == ".png") return write_png(path, image);
#endif
  throw ImageError("unsupported image format '" + ext + "': " + path.string());
}

}  // namespace survtrack
