#include "tangent/imageio.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "tangent/error.hpp"

namespace tangent {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t max_value(const ChannelSemantics& s) {
  return s.bit_depth() == 16 ? 65535u : 255u;
}

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<png_byte> data;  // tightly packed rows, big-endian 16-bit
};

// Returns an empty string on success, an error message otherwise. Kept free
// of objects with non-trivial destructors between setjmp and longjmp.
std::string decode_png(std::FILE* file, RawPng& out) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return "cannot allocate PNG reader";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "cannot allocate PNG info";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "corrupt PNG stream";
  }
  png_init_io(png, file);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const png_size_t row_bytes = png_get_rowbytes(png, info);
  out.data.resize(row_bytes * static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, out.data.data() + row_bytes * y, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return {};
}

std::string encode_png(std::FILE* file, const RawPng& raw) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return "cannot allocate PNG writer";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return "cannot allocate PNG info";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return "PNG encoder failure";
  }
  static constexpr int kColorTypes[] = {PNG_COLOR_TYPE_GRAY,
                                        PNG_COLOR_TYPE_GRAY_ALPHA,
                                        PNG_COLOR_TYPE_RGB,
                                        PNG_COLOR_TYPE_RGB_ALPHA};
  png_init_io(png, file);
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
               kColorTypes[raw.channels - 1], PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(raw.width) *
                                raw.channels * (raw.bit_depth / 8);
  for (int y = 0; y < raw.height; ++y) {
    png_write_row(png, raw.data.data() + row_bytes * y);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return {};
}

}  // namespace

float dequantize(std::uint32_t stored, const ChannelSemantics& s) {
  switch (s.kind) {
    case ChannelKind::kColor8:
    case ChannelKind::kColor16:
      return static_cast<float>(static_cast<double>(stored) / max_value(s));
    case ChannelKind::kLabel8:
      return static_cast<float>(stored);
    case ChannelKind::kDepth16:
      if (stored == s.invalid_value) {
        return std::numeric_limits<float>::quiet_NaN();
      }
      return static_cast<float>(stored * s.depth_scale);
  }
  return 0.0f;
}

std::uint32_t quantize(float value, const ChannelSemantics& s) {
  auto out_of_range = [&] {
    std::ostringstream msg;
    msg << "value " << value << " cannot be encoded as " << kind_name(s.kind);
    fail(ErrorCode::kRange, msg.str());
  };
  switch (s.kind) {
    case ChannelKind::kColor8:
    case ChannelKind::kColor16: {
      if (!std::isfinite(value)) out_of_range();
      const double q =
          std::floor(static_cast<double>(value) * max_value(s) + 0.5);
      if (q < 0.0 || q > max_value(s)) out_of_range();
      return static_cast<std::uint32_t>(q);
    }
    case ChannelKind::kLabel8: {
      if (!(value >= 0.0f && value <= 255.0f) || value != std::floor(value)) {
        out_of_range();
      }
      return static_cast<std::uint32_t>(value);
    }
    case ChannelKind::kDepth16: {
      if (std::isnan(value)) return s.invalid_value;
      if (!std::isfinite(value)) out_of_range();
      const double q = std::floor(static_cast<double>(value) / s.depth_scale + 0.5);
      if (q < 0.0 || q > 65535.0 || q == s.invalid_value) out_of_range();
      return static_cast<std::uint32_t>(q);
    }
  }
  return 0;
}

Image read_png(const std::string& path, const ChannelSemantics& semantics) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorCode::kIoRead, "cannot open '" + path + "'");
  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    fail(ErrorCode::kIoRead, "'" + path + "' is not a PNG file");
  }
  std::rewind(file.get());

  RawPng raw;
  if (const std::string err = decode_png(file.get(), raw); !err.empty()) {
    fail(ErrorCode::kIoRead, "'" + path + "': " + err);
  }
  if (raw.bit_depth != semantics.bit_depth()) {
    fail(ErrorCode::kFormatBitDepth,
         "'" + path + "' has bit depth " + std::to_string(raw.bit_depth) +
             ", " + std::string(kind_name(semantics.kind)) + " needs " +
             std::to_string(semantics.bit_depth()));
  }

  Image image(raw.height, raw.width, raw.channels);
  const bool wide = raw.bit_depth == 16;
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    const std::uint32_t v =
        wide ? (static_cast<std::uint32_t>(raw.data[2 * i]) << 8) |
                   raw.data[2 * i + 1]
             : raw.data[i];
    image.samples[i] = dequantize(v, semantics);
  }
  return image;
}

void write_png(const Image& image, const std::string& path,
               const ChannelSemantics& semantics) {
  if (image.channels < 1 || image.channels > 4 || image.height < 1 ||
      image.width < 1) {
    fail(ErrorCode::kInvalidArgument,
         "PNG output needs 1-4 channels and a non-empty image");
  }
  RawPng raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.channels = image.channels;
  raw.bit_depth = semantics.bit_depth();
  const bool wide = raw.bit_depth == 16;
  raw.data.resize(image.samples.size() * (wide ? 2 : 1));
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    const std::uint32_t q = quantize(image.samples[i], semantics);
    if (wide) {
      raw.data[2 * i] = static_cast<png_byte>(q >> 8);
      raw.data[2 * i + 1] = static_cast<png_byte>(q & 0xff);
    } else {
      raw.data[i] = static_cast<png_byte>(q);
    }
  }

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorCode::kIoWrite, "cannot create '" + path + "'");
  if (const std::string err = encode_png(file.get(), raw); !err.empty()) {
    fail(ErrorCode::kIoWrite, "'" + path + "': " + err);
  }
  if (std::fflush(file.get()) != 0) {
    fail(ErrorCode::kIoWrite, "cannot flush '" + path + "'");
  }
}

EquirectImage load_equirect(const std::string& path,
                            const ChannelSemantics& semantics) {
  EquirectImage out{read_png(path, semantics), semantics};
  check_equirect_shape(out.height(), out.width());
  return out;
}

void save_equirect(const EquirectImage& image, const std::string& path) {
  check_equirect_shape(image.height(), image.width());
  write_png(image.pixels, path, image.semantics);
}

}  // namespace tangent
