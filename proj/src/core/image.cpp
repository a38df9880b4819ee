#include "tangent/image.hpp"

#include <cmath>
#include <string>

#include "tangent/error.hpp"
#include "tangent/sampling.hpp"

namespace tangent {

std::string_view kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kColor8: return "color8";
    case ChannelKind::kColor16: return "color16";
    case ChannelKind::kLabel8: return "label8";
    case ChannelKind::kDepth16: return "depth16";
  }
  return "color8";
}

ChannelKind parse_kind(std::string_view name) {
  if (name == "color8") return ChannelKind::kColor8;
  if (name == "color16") return ChannelKind::kColor16;
  if (name == "label8") return ChannelKind::kLabel8;
  if (name == "depth16") return ChannelKind::kDepth16;
  fail(ErrorCode::kInvalidArgument,
       "unknown channel semantics '" + std::string(name) +
           "' (expected color8, color16, label8 or depth16)");
}

std::string_view interp_name(Interp mode) {
  return mode == Interp::kNearest ? "nearest" : "bilinear";
}

Interp parse_interp(std::string_view name) {
  if (name == "bilinear") return Interp::kBilinear;
  if (name == "nearest") return Interp::kNearest;
  fail(ErrorCode::kInvalidArgument,
       "unknown interpolation '" + std::string(name) +
           "' (expected bilinear or nearest)");
}

SphericalCoord EquirectImage::pixel_center(int row, int col) const {
  return {kPi * (0.5 - (row + 0.5) / height()),
          2.0 * kPi * ((col + 0.5) / width() - 0.5)};
}

Eigen::Vector2d EquirectImage::to_pixel(const SphericalCoord& c) const {
  return {(c.lon / (2.0 * kPi) + 0.5) * width() - 0.5,
          (0.5 - c.lat / kPi) * height() - 0.5};
}

bool is_power_of_two(long long value) {
  return value > 0 && (value & (value - 1)) == 0;
}

void check_equirect_shape(int height, int width) {
  if (height < 1 || width != 2 * height) {
    fail(ErrorCode::kFormatAspect,
         "equirectangular image must have width = 2 x height, got " +
             std::to_string(height) + "x" + std::to_string(width));
  }
}

int equirect_level(int height, int width) {
  check_equirect_shape(height, width);
  if (height < 2 || !is_power_of_two(height)) {
    fail(ErrorCode::kFormatDimensions,
         "equirectangular height must be a power of two >= 2, got " +
             std::to_string(height));
  }
  int s = -1;
  for (int h = height; h > 1; h >>= 1) ++s;
  return s;
}

}  // namespace tangent
