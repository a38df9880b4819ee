#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tangent/features.hpp"

// Analytic depth scenes with exact ray casts.
namespace scenes {

using namespace tangent;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  Eigen::Vector3d lo, hi;
};

// Slab test; returns the entry distance for a ray starting outside the box.
inline double hit_from_outside(const Box& b, const Eigen::Vector3d& o,
                        const Eigen::Vector3d& d) {
  double t0 = 0.0, t1 = kInf;
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < b.lo[k] || o[k] > b.hi[k]) return kInf;
      continue;
    }
    double a = (b.lo[k] - o[k]) / d[k];
    double c = (b.hi[k] - o[k]) / d[k];
    if (a > c) std::swap(a, c);
    t0 = std::max(t0, a);
    t1 = std::min(t1, c);
  }
  return t0 <= t1 && t0 > 0.0 ? t0 : kInf;
}

// Exit distance for a ray starting inside the box.
inline double hit_from_inside(const Box& b, const Eigen::Vector3d& o,
                       const Eigen::Vector3d& d) {
  double t = kInf;
  for (int k = 0; k < 3; ++k) {
    if (d[k] > 0) t = std::min(t, (b.hi[k] - o[k]) / d[k]);
    if (d[k] < 0) t = std::min(t, (b.lo[k] - o[k]) / d[k]);
  }
  return t;
}

struct TwoBoxScene {
  Box room{{-4, -3, -1.5}, {4, 3, 1.5}};
  Box occluder{{0.8, -0.6, -1.5}, {1.6, 0.6, 0.4}};
  double cast(const Eigen::Vector3d& o, const Eigen::Vector3d& d) const {
    return std::min(hit_from_inside(room, o, d), hit_from_outside(occluder, o, d));
  }
};

template <typename Cast>
PosedSphericalImage render(int h, const Pose& pose, const Cast& cast) {
  PosedSphericalImage img;
  img.pose = pose;
  ChannelSemantics depth;
  depth.kind = ChannelKind::kDepth16;
  img.depth = {Image(h, 2 * h, 1), depth};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < 2 * h; ++j) {
      const Eigen::Vector3d local = to_unit_vector(img.depth.pixel_center(i, j));
      img.depth.pixels.at(i, j) = static_cast<float>(
          cast(pose.translation, pose.rotation * local));
    }
  }
  return img;
}

// Fraction of `self`'s depth points visible to `other` under the occlusion
// rule, with the depth lookup replaced by an exact ray cast from `other`.
template <typename Cast>
double ray_cast_fraction(const PosedSphericalImage& self,
                         const PosedSphericalImage& other, const Cast& cast) {
  std::int64_t valid = 0, seen = 0;
  const auto& d = self.depth;
  for (int i = 0; i < d.height(); ++i) {
    for (int j = 0; j < d.width(); ++j) {
      const double r = d.pixels.at(i, j);
      if (!std::isfinite(r)) continue;
      ++valid;
      const Eigen::Vector3d x =
          self.pose.rotation * (r * to_unit_vector(d.pixel_center(i, j))) +
          self.pose.translation;
      const Eigen::Vector3d v = x - other.pose.translation;
      const double dist = v.norm();
      const double hit = cast(other.pose.translation, v / dist);
      const double tol = std::max(kOcclusionRelativeTolerance * dist,
                                  kOcclusionAbsoluteTolerance);
      if (std::abs(hit - dist) <= tol) ++seen;
    }
  }
  return static_cast<double>(seen) / valid;
}

inline Pose rotation_z(double angle, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
  return {Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t};
}

}  // namespace scenes
