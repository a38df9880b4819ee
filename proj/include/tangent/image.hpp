#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tangent/gnomonic.hpp"

namespace tangent {

enum class ChannelKind { kColor8, kColor16, kLabel8, kDepth16 };

std::string_view kind_name(ChannelKind kind);
// Throws kInvalidArgument for unknown names.
ChannelKind parse_kind(std::string_view name);

struct ChannelSemantics {
  ChannelKind kind = ChannelKind::kColor8;
  double depth_scale = 1.0 / 512.0;  // meters per unit, depth16 only
  std::uint16_t invalid_value = 65535;

  bool is_label() const { return kind == ChannelKind::kLabel8; }
  bool is_depth() const { return kind == ChannelKind::kDepth16; }
  int bit_depth() const {
    return kind == ChannelKind::kColor16 || kind == ChannelKind::kDepth16 ? 16
                                                                          : 8;
  }
};

// Dense row-major H x W x C float image.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> samples;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c),
        samples(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t index(int row, int col, int ch = 0) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  float& at(int row, int col, int ch = 0) { return samples[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const {
    return samples[index(row, col, ch)];
  }
};

/*
  Full-sphere equirectangular image, W = 2H. Pixel (i, j) has its center at
  lat = pi (0.5 - (i + 0.5) / H), lon = 2 pi ((j + 0.5) / W - 0.5).
  A level-s image has H = 2^(s+1).
*/
struct EquirectImage {
  Image pixels;
  ChannelSemantics semantics;

  int height() const { return pixels.height; }
  int width() const { return pixels.width; }
  int channels() const { return pixels.channels; }

  SphericalCoord pixel_center(int row, int col) const;
  // Continuous (column, row) with integer values at pixel centers.
  Eigen::Vector2d to_pixel(const SphericalCoord& c) const;
};

// Throws kFormatAspect unless W = 2H with H >= 1.
void check_equirect_shape(int height, int width);

// Level s with H = 2^(s+1); throws kFormatDimensions when H is not a power of
// two >= 2, kFormatAspect when W != 2H.
int equirect_level(int height, int width);

bool is_power_of_two(long long value);

}  // namespace tangent
