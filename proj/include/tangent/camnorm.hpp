#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "tangent/image.hpp"
#include "tangent/sampling.hpp"

namespace tangent {

// Pinhole intrinsics. Pixel coordinates are continuous with the image
// covering [0, width] x [0, height]; pixel (i, j) has its center at
// (j + 0.5, i + 0.5).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d matrix() const;
};

// Throws kInvalidArgument unless fx, fy > 0 and width, height >= 1.
void validate(const CameraIntrinsics& cam);

struct AngularResolution {
  double x = 0.0;  // radians per pixel
  double y = 0.0;
};

AngularResolution angular_resolution(const CameraIntrinsics& cam);

/*
  Square virtual camera with isotropic angular resolution `alpha`.
  out_dim = round(requested fov / alpha) and `fov` is snapped to
  out_dim * alpha, so the virtual camera's resolution is exactly alpha.
*/
struct NormalizationTarget {
  double alpha = 0.0;
  double fov = 0.0;
  int out_dim = 0;

  double focal() const;      // out_dim / (2 tan(fov / 2))
  double principal() const;  // out_dim / 2
  CameraIntrinsics camera() const;
};

// Target for a level-s spherical input: alpha = 2 pi / 2^(s+2).
NormalizationTarget make_target(int spherical_level, double fov);

struct Shift {
  double dx = 0.0;
  double dy = 0.0;
};

// Closed interval of principal-point shifts keeping the crop inside the
// source image.
struct ShiftRange {
  double min_dx = 0.0, max_dx = 0.0;
  double min_dy = 0.0, max_dy = 0.0;
};

ShiftRange legal_shift_range(const CameraIntrinsics& src,
                             const NormalizationTarget& target);

// Maps target pixel coordinates to source pixel coordinates:
// source = (K + Delta) K'^-1 [x', y', 1]^T.
class PixelMap {
 public:
  PixelMap(const CameraIntrinsics& src, const CameraIntrinsics& virtual_cam,
           const Shift& shift);

  Eigen::Vector2d operator()(const Eigen::Vector2d& target) const {
    return {scale_x_ * target.x() + offset_x_,
            scale_y_ * target.y() + offset_y_};
  }
  Eigen::Matrix3d matrix() const;

 private:
  double scale_x_, scale_y_, offset_x_, offset_y_;
};

// Throws kInvalidArgument, quoting the legal interval, when the shift moves
// the crop outside the source image.
PixelMap normalize_camera(const CameraIntrinsics& src,
                          const NormalizationTarget& target,
                          const Shift& shift);

// Uniform draw from the legal range. Throws kSourceTooNarrow when the source
// field of view is smaller than the target's on either axis.
Shift sample_shift(const CameraIntrinsics& src,
                   const NormalizationTarget& target, std::uint64_t seed);

// Resamples `src` into the out_dim x out_dim virtual image through `map`.
Image apply_pixel_map(const Image& src, const PixelMap& map, int out_dim,
                      Interp mode, int threads = 0);

}  // namespace tangent
