#include "gsm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "gsm/error.hpp"

namespace gsm {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

unsigned char quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageGrid from_interleaved(const std::vector<unsigned char>& bytes, int w, int h, int channels) {
  ImageGrid u(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        u(x, y, c) = bytes[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
      }
    }
  }
  return u;
}

std::vector<unsigned char> to_interleaved(const ImageGrid& u) {
  std::vector<unsigned char> bytes(u.size());
  const int channels = u.channels();
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        bytes[(static_cast<std::size_t>(y) * u.width() + x) * channels + c] = quantize(u(x, y, c));
      }
    }
  }
  return bytes;
}

ImageGrid load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open '" + path.string() + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
  int w = 0, h = 0, channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path.string() + "' is not a readable PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 8 && color_type != PNG_COLOR_TYPE_PALETTE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path.string() + "': unsupported bit depth " + std::to_string(bit_depth) +
                  " (only 8-bit images are supported)");
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  bytes.resize(static_cast<std::size_t>(w) * h * channels);
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (channels != 1 && channels != 3) {
    throw IoError("'" + path.string() + "': unsupported channel count " + std::to_string(channels));
  }
  return from_interleaved(bytes, w, h, channels);
}

void save_png(const ImageGrid& u, const std::filesystem::path& path) {
  if (u.channels() != 1 && u.channels() != 3) throw IoError("PNG export needs 1 or 3 channels");
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  std::vector<unsigned char> bytes = to_interleaved(u);
  std::vector<png_bytep> rows(u.height());
  for (int y = 0; y < u.height(); ++y) {
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * u.width() * u.channels();
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, u.width(), u.height(), 8,
               u.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Skips whitespace and '#' comments in a PNM header.
int read_pnm_int(std::istream& in) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  in >> v;
  if (!in) throw IoError("malformed PNM header");
  return v;
}

ImageGrid load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw IoError("'" + path.string() + "' is not a binary PGM/PPM");
  }
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (w < 1 || h < 1) throw IoError("'" + path.string() + "': invalid dimensions");
  if (maxval != 255) {
    throw IoError("'" + path.string() + "': unsupported bit depth (maxval " + std::to_string(maxval) +
                  ", only 255 is supported)");
  }
  in.get();  // single whitespace before raster
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError("'" + path.string() + "': truncated raster");
  return from_interleaved(bytes, w, h, channels);
}

void save_pnm(const ImageGrid& u, const std::filesystem::path& path, int channels) {
  if (u.channels() != channels) {
    throw IoError("'" + path.string() + "': " + (channels == 1 ? "PGM needs 1 channel" : "PPM needs 3 channels"));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << (channels == 1 ? "P5" : "P6") << '\n' << u.width() << ' ' << u.height() << "\n255\n";
  const std::vector<unsigned char> bytes = to_interleaved(u);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

ImageGrid load_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return load_pnm(path);
  throw IoError("unsupported image format '" + ext + "' (expected .png, .pgm or .ppm)");
}

void save_image(const ImageGrid& u, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(u, path);
  if (ext == ".pgm") return save_pnm(u, path, 1);
  if (ext == ".ppm") return save_pnm(u, path, 3);
  throw IoError("unsupported image format '" + ext + "' (expected .png, .pgm or .ppm)");
}

}  // namespace gsm
