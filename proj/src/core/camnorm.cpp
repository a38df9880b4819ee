#include "tangent/camnorm.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "tangent/error.hpp"
#include "tangent/gnomonic.hpp"
#include "tangent/parallel.hpp"

namespace tangent {
namespace {

double range_tolerance(const CameraIntrinsics& src) {
  return 1e-9 * std::max(src.width, src.height);
}

}  // namespace

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void validate(const CameraIntrinsics& cam) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0) || cam.width < 1 || cam.height < 1 ||
      !std::isfinite(cam.cx) || !std::isfinite(cam.cy)) {
    fail(ErrorCode::kInvalidArgument,
         "intrinsics need fx, fy > 0 and width, height >= 1");
  }
}

AngularResolution angular_resolution(const CameraIntrinsics& cam) {
  validate(cam);
  const double fov_x = 2.0 * std::atan(cam.width / (2.0 * cam.fx));
  const double fov_y = 2.0 * std::atan(cam.height / (2.0 * cam.fy));
  return {fov_x / cam.width, fov_y / cam.height};
}

double NormalizationTarget::focal() const {
  return out_dim / (2.0 * std::tan(0.5 * fov));
}

double NormalizationTarget::principal() const { return 0.5 * out_dim; }

CameraIntrinsics NormalizationTarget::camera() const {
  const double f = focal();
  const double c = principal();
  return {f, f, c, c, out_dim, out_dim};
}

NormalizationTarget make_target(int spherical_level, double fov) {
  if (spherical_level < 0 || spherical_level > 24) {
    fail(ErrorCode::kInvalidArgument,
         "spherical level must lie in [0, 24], got " +
             std::to_string(spherical_level));
  }
  if (!(fov > 0.0 && fov < kPi)) {
    fail(ErrorCode::kInvalidArgument, "field of view must lie in (0, pi)");
  }
  NormalizationTarget t;
  t.alpha = 2.0 * kPi / std::ldexp(1.0, spherical_level + 2);
  t.out_dim = static_cast<int>(std::lround(fov / t.alpha));
  if (t.out_dim < 1) {
    fail(ErrorCode::kInvalidArgument,
         "field of view is smaller than half a pixel at this level");
  }
  t.fov = t.out_dim * t.alpha;
  if (!(t.fov < kPi)) {
    fail(ErrorCode::kInvalidArgument,
         "snapped field of view reaches pi; choose a smaller fov");
  }
  return t;
}

ShiftRange legal_shift_range(const CameraIntrinsics& src,
                             const NormalizationTarget& target) {
  validate(src);
  const double f = target.focal();
  const double c = target.principal();
  const int dim = target.out_dim;
  ShiftRange r;
  r.min_dx = src.fx / f * c - src.cx;
  r.max_dx = src.width - src.cx - src.fx / f * (dim - c);
  r.min_dy = src.fy / f * c - src.cy;
  r.max_dy = src.height - src.cy - src.fy / f * (dim - c);
  return r;
}

PixelMap::PixelMap(const CameraIntrinsics& src,
                   const CameraIntrinsics& virtual_cam, const Shift& shift)
    : scale_x_(src.fx / virtual_cam.fx),
      scale_y_(src.fy / virtual_cam.fy),
      offset_x_(src.cx + shift.dx - src.fx / virtual_cam.fx * virtual_cam.cx),
      offset_y_(src.cy + shift.dy - src.fy / virtual_cam.fy * virtual_cam.cy) {}

Eigen::Matrix3d PixelMap::matrix() const {
  Eigen::Matrix3d m;
  m << scale_x_, 0.0, offset_x_, 0.0, scale_y_, offset_y_, 0.0, 0.0, 1.0;
  return m;
}

PixelMap normalize_camera(const CameraIntrinsics& src,
                          const NormalizationTarget& target,
                          const Shift& shift) {
  const ShiftRange r = legal_shift_range(src, target);
  const double tol = range_tolerance(src);
  if (!(shift.dx >= r.min_dx - tol && shift.dx <= r.max_dx + tol &&
        shift.dy >= r.min_dy - tol && shift.dy <= r.max_dy + tol)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "shift (" << shift.dx << ", " << shift.dy
        << ") is outside the legal range dx in [" << r.min_dx << ", "
        << r.max_dx << "], dy in [" << r.min_dy << ", " << r.max_dy << "]";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
  return PixelMap(src, target.camera(), shift);
}

Shift sample_shift(const CameraIntrinsics& src,
                   const NormalizationTarget& target, std::uint64_t seed) {
  ShiftRange r = legal_shift_range(src, target);
  const double tol = range_tolerance(src);
  auto collapse = [&](double& lo, double& hi, const char* axis) {
    if (lo <= hi) return;
    if (lo - hi > tol) {
      std::ostringstream msg;
      msg << "source field of view is narrower than the target along " << axis
          << " (legal interval [" << lo << ", " << hi << "] is empty)";
      fail(ErrorCode::kSourceTooNarrow, msg.str());
    }
    lo = hi = 0.5 * (lo + hi);
  };
  collapse(r.min_dx, r.max_dx, "x");
  collapse(r.min_dy, r.max_dy, "y");

  std::mt19937_64 gen(seed);
  auto uniform = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  const double ux = uniform();
  const double uy = uniform();
  return {r.min_dx + ux * (r.max_dx - r.min_dx),
          r.min_dy + uy * (r.max_dy - r.min_dy)};
}

Image apply_pixel_map(const Image& src, const PixelMap& map, int out_dim,
                      Interp mode, int threads) {
  if (out_dim < 1) fail(ErrorCode::kInvalidArgument, "out_dim must be >= 1");
  Image out(out_dim, out_dim, src.channels);
  parallel_for(static_cast<std::size_t>(out_dim), threads,
               [&](std::size_t begin, std::size_t end) {
    for (int row = static_cast<int>(begin); row < static_cast<int>(end);
         ++row) {
      for (int col = 0; col < out_dim; ++col) {
        const Eigen::Vector2d s = map({col + 0.5, row + 0.5});
        sample(src, s.x() - 0.5, s.y() - 0.5, mode, ColumnBorder::kClamp,
               &out.samples[out.index(row, col)]);
      }
    }
  });
  return out;
}

}  // namespace tangent
