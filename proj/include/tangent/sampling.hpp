#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "tangent/image.hpp"

namespace tangent {

enum class Interp { kBilinear, kNearest };

std::string_view interp_name(Interp mode);
Interp parse_interp(std::string_view name);

// Column border handling. Rows always clamp.
enum class ColumnBorder { kClamp, kWrap };

namespace detail {

inline int wrap_index(long long i, int n) {
  long long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

inline int clamp_index(long long i, int n) {
  return static_cast<int>(std::clamp<long long>(i, 0, n - 1));
}

}  // namespace detail

/*
  Samples `img` at continuous pixel coordinates (col, row), integer values at
  pixel centers, writing `img.channels` floats to `out`. Bilinear weights are
  computed in double; each output is a convex combination of its taps.
*/
inline void sample(const Image& img, double col, double row, Interp mode,
                   ColumnBorder border, float* out) {
  const int c = img.channels;
  auto fix_col = [&](long long j) {
    return border == ColumnBorder::kWrap ? detail::wrap_index(j, img.width)
                                         : detail::clamp_index(j, img.width);
  };

  if (mode == Interp::kNearest) {
    const int i = detail::clamp_index(
        static_cast<long long>(std::floor(row + 0.5)), img.height);
    const int j = fix_col(static_cast<long long>(std::floor(col + 0.5)));
    const float* src = &img.samples[img.index(i, j)];
    std::copy(src, src + c, out);
    return;
  }

  const double r = std::clamp(row, 0.0, static_cast<double>(img.height - 1));
  const double cc = border == ColumnBorder::kWrap
                        ? col
                        : std::clamp(col, 0.0, static_cast<double>(img.width - 1));
  const double r_floor = std::floor(r);
  const double c_floor = std::floor(cc);
  const double fr = r - r_floor;
  const double fc = cc - c_floor;
  const int i0 = static_cast<int>(r_floor);
  const int i1 = std::min(i0 + 1, img.height - 1);
  const int j0 = fix_col(static_cast<long long>(c_floor));
  const int j1 = fix_col(static_cast<long long>(c_floor) + 1);

  const float* p00 = &img.samples[img.index(i0, j0)];
  const float* p01 = &img.samples[img.index(i0, j1)];
  const float* p10 = &img.samples[img.index(i1, j0)];
  const float* p11 = &img.samples[img.index(i1, j1)];
  const double w00 = (1.0 - fr) * (1.0 - fc);
  const double w01 = (1.0 - fr) * fc;
  const double w10 = fr * (1.0 - fc);
  const double w11 = fr * fc;
  // Zero-weight taps are skipped so an invalid (NaN) neighbor does not leak
  // into samples that sit exactly on valid pixels.
  for (int k = 0; k < c; ++k) {
    double acc = 0.0;
    if (w00 != 0.0) acc += w00 * p00[k];
    if (w01 != 0.0) acc += w01 * p01[k];
    if (w10 != 0.0) acc += w10 * p10[k];
    if (w11 != 0.0) acc += w11 * p11[k];
    out[k] = static_cast<float>(acc);
  }
}

}  // namespace tangent
