#include "piqa/raster_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

namespace piqa {

namespace {

std::string lower_ext(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

uint8_t quantize(float v) {
  return static_cast<uint8_t>(std::lround(clamp01(v) * 255.0f));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---- PNG ----

Raster load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open file: " + path);

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw FormatError("not a PNG file: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<std::vector<uint8_t>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte bit_depth = png_get_bit_depth(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("16-bit PNG not supported: " + path);
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG channel layout: " + path);
  }

  const size_t stride = png_get_rowbytes(png, info);
  rows.assign(height, std::vector<uint8_t>(stride));
  std::vector<png_bytep> row_ptrs(height);
  for (int y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Raster r(width, height, channels);
  for (int y = 0; y < height; ++y)
    for (size_t i = 0; i < static_cast<size_t>(width) * channels; ++i)
      r.data[static_cast<size_t>(y) * width * channels + i] =
          rows[y][i] / 255.0f;
  return r;
}

void save_png(const Raster& r, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open file for writing: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, r.width, r.height, 8,
               r.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(r.width) * r.channels);
  for (int y = 0; y < r.height; ++y) {
    for (size_t i = 0; i < row.size(); ++i)
      row[i] = quantize(r.data[static_cast<size_t>(y) * row.size() + i]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- PGM / PPM (binary, maxval 255) ----

int read_pnm_token(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c))
    throw FormatError("malformed PNM header: " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

Raster load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' ||
      (magic[1] != '5' && magic[1] != '6'))
    throw FormatError("unsupported PNM magic (want P5/P6): " + path);
  const int channels = magic[1] == '5' ? 1 : 3;
  const int width = read_pnm_token(in, path);
  const int height = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (width <= 0 || height <= 0)
    throw FormatError("bad PNM dimensions: " + path);
  if (maxval != 255)
    throw FormatError("PNM maxval must be 255: " + path);

  const size_t n = static_cast<size_t>(width) * height * channels;
  std::vector<uint8_t> bytes(n);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(n)))
    throw FormatError("truncated PNM payload: " + path);

  Raster r(width, height, channels);
  for (size_t i = 0; i < n; ++i) r.data[i] = bytes[i] / 255.0f;
  return r;
}

void save_pnm(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << (r.channels == 1 ? "P5" : "P6") << "\n"
      << r.width << " " << r.height << "\n255\n";
  std::vector<uint8_t> bytes(r.data.size());
  for (size_t i = 0; i < r.data.size(); ++i) bytes[i] = quantize(r.data[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

Raster load_raster(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw IoError("file does not exist: " + path);
  const std::string ext = lower_ext(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return load_pnm(path);
  throw FormatError("unsupported raster format: " + path);
}

void save_raster(const Raster& raster, const std::string& path) {
  if (raster.width <= 0 || raster.height <= 0 || raster.data.empty())
    throw ArgumentError("save_raster: empty raster");
  const std::string ext = lower_ext(path);
  if (ext == ".png") return save_png(raster, path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && raster.channels != 1) ||
        (ext == ".ppm" && raster.channels != 3))
      throw ArgumentError("channel count does not match " + ext + ": " + path);
    return save_pnm(raster, path);
  }
  throw FormatError("unsupported raster format: " + path);
}

}  // namespace piqa
