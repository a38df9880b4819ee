#pragma once

#include <vector>

#include <Eigen/Core>

#include "tangent/icosphere.hpp"

namespace tangent {

inline constexpr double kPi = 3.14159265358979323846;

// Latitude in [-pi/2, pi/2], longitude in [-pi, pi). Radians.
struct SphericalCoord {
  double lat = 0.0;
  double lon = 0.0;
};

/// Wraps a longitude into [-pi, pi).
double wrap_longitude(double lon);

// x = cos(lat) cos(lon), y = cos(lat) sin(lon), z = sin(lat).
Eigen::Vector3d to_unit_vector(const SphericalCoord& c);
SphericalCoord to_spherical(const Eigen::Vector3d& v);

/// Great-circle distance in radians.
double angular_distance(const SphericalCoord& a, const SphericalCoord& b);

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

// Gnomonic projection onto the plane tangent at `center`. +x points east and
// +y points north at the center. Throws kOutOfHemisphere when `point` is 90
// degrees or more from the center.
PlanePoint gnomonic_forward(const SphericalCoord& center,
                            const SphericalCoord& point);

SphericalCoord gnomonic_inverse(const SphericalCoord& center,
                                const PlanePoint& plane);

/*
  Vector form of the same projection. The frame is (east, north, normal) at
  the tangent point; projecting a direction is two dot-product ratios, which
  is what the resampling loops use.
*/
class TangentFrame {
 public:
  explicit TangentFrame(const SphericalCoord& center);

  // Plane coordinates of a direction; requires dot(dir, normal) > 0.
  PlanePoint project(const Eigen::Vector3d& dir) const {
    const double w = dir.dot(normal_);
    return {dir.dot(east_) / w, dir.dot(north_) / w};
  }

  // Unit direction of a plane point.
  Eigen::Vector3d unproject(const PlanePoint& p) const {
    return (normal_ + p.x * east_ + p.y * north_).normalized();
  }

  const Eigen::Vector3d& normal() const { return normal_; }

 private:
  Eigen::Vector3d east_, north_, normal_;
};

/// Tangent image side length 2^(source_level - base_level).
int tangent_dim(int source_level, int base_level);

struct TangentPlaneSpec {
  int face_index = 0;
  SphericalCoord center;
  int dim = 1;
  // Plane coordinate of the outermost pixel centers: (d-1)/(2d) R_v(b-1).
  double half_extent = 0.0;
  // Spacing of pixel centers in plane units: R_v(b-1) / d.
  double pitch = 0.0;
  int base_level = 0;
  int source_level = 0;

  // Pixel edges lie at +/- pitch * dim / 2; samples in
  // [-half_extent - pitch/2, half_extent + pitch/2] are inside the grid.
  double grid_bound() const { return 0.5 * pitch * dim; }

  // Continuous pixel coordinates (column, row) of a plane point; integer
  // values are pixel centers, row 0 is the northernmost row.
  Eigen::Vector2d plane_to_pixel(const PlanePoint& p) const {
    const double half = 0.5 * dim - 0.5;
    return {p.x / pitch + half, half - p.y / pitch};
  }
  PlanePoint pixel_to_plane(double col, double row) const {
    const double half = 0.5 * dim - 0.5;
    return {(col - half) * pitch, (half - row) * pitch};
  }
};

// One spec per face of `base_sphere`, centered at the face barycenter.
std::vector<TangentPlaneSpec> make_plane_specs(const Icosphere& base_sphere,
                                               int source_level);

/// Row-major dim x dim sample directions of one tangent image.
std::vector<SphericalCoord> plane_pixel_grid(const TangentPlaneSpec& spec);

// Full angle subtended by the grid along its central axis,
// 2 atan(half_extent).
double axis_fov(const TangentPlaneSpec& spec);

// Angle between the rays through two adjacent grid corners (outermost pixel
// centers), i.e. the field of view measured along one image edge.
double edge_fov(const TangentPlaneSpec& spec);

}  // namespace tangent
