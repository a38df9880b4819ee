#include "tangent/gnomonic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "tangent/error.hpp"

namespace tangent {

double wrap_longitude(double lon) {
  double wrapped = std::fmod(lon + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  wrapped -= kPi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  return wrapped >= kPi ? -kPi : wrapped;
}

Eigen::Vector3d to_unit_vector(const SphericalCoord& c) {
  const double cl = std::cos(c.lat);
  return {cl * std::cos(c.lon), cl * std::sin(c.lon), std::sin(c.lat)};
}

SphericalCoord to_spherical(const Eigen::Vector3d& v) {
  const double lat = std::atan2(v.z(), std::hypot(v.x(), v.y()));
  return {lat, wrap_longitude(std::atan2(v.y(), v.x()))};
}

double angular_distance(const SphericalCoord& a, const SphericalCoord& b) {
  const Eigen::Vector3d va = to_unit_vector(a);
  const Eigen::Vector3d vb = to_unit_vector(b);
  return std::atan2(va.cross(vb).norm(), va.dot(vb));
}

PlanePoint gnomonic_forward(const SphericalCoord& center,
                            const SphericalCoord& point) {
  const double dlon = point.lon - center.lon;
  const double cos_c = std::sin(center.lat) * std::sin(point.lat) +
                       std::cos(center.lat) * std::cos(point.lat) *
                           std::cos(dlon);
  // Rounding leaves cos_c near 1e-17 at exactly 90 degrees.
  if (!(cos_c > 1e-12)) {
    std::ostringstream msg;
    msg << "point (" << point.lat << ", " << point.lon
        << ") is not in the front hemisphere of center (" << center.lat
        << ", " << center.lon << ")";
    fail(ErrorCode::kOutOfHemisphere, msg.str());
  }
  const double x = std::cos(point.lat) * std::sin(dlon) / cos_c;
  const double y = (std::cos(center.lat) * std::sin(point.lat) -
                    std::sin(center.lat) * std::cos(point.lat) *
                        std::cos(dlon)) /
                   cos_c;
  return {x, y};
}

SphericalCoord gnomonic_inverse(const SphericalCoord& center,
                                const PlanePoint& plane) {
  const double rho = std::hypot(plane.x, plane.y);
  if (rho == 0.0) return {center.lat, wrap_longitude(center.lon)};
  const double c = std::atan(rho);
  const double sin_c = std::sin(c);
  const double cos_c = std::cos(c);
  const double s = std::clamp(
      cos_c * std::sin(center.lat) +
          plane.y * sin_c * std::cos(center.lat) / rho,
      -1.0, 1.0);
  const double lon =
      center.lon + std::atan2(plane.x * sin_c,
                              rho * std::cos(center.lat) * cos_c -
                                  plane.y * std::sin(center.lat) * sin_c);
  return {std::asin(s), wrap_longitude(lon)};
}

TangentFrame::TangentFrame(const SphericalCoord& center) {
  const double sl = std::sin(center.lat), cl = std::cos(center.lat);
  const double so = std::sin(center.lon), co = std::cos(center.lon);
  normal_ = {cl * co, cl * so, sl};
  east_ = {-so, co, 0.0};
  north_ = {-sl * co, -sl * so, cl};
}

int tangent_dim(int source_level, int base_level) {
  if (base_level < 0 || source_level < base_level) {
    fail(ErrorCode::kInvalidArgument,
         "tangent dimension needs source level >= base level >= 0, got s=" +
             std::to_string(source_level) +
             " b=" + std::to_string(base_level));
  }
  if (source_level - base_level > 30) {
    fail(ErrorCode::kResourceLimit, "tangent dimension exceeds 2^30");
  }
  return 1 << (source_level - base_level);
}

std::vector<TangentPlaneSpec> make_plane_specs(const Icosphere& base_sphere,
                                               int source_level) {
  const int b = base_sphere.level();
  const int d = tangent_dim(source_level, b);
  const double extent = vertex_resolution_at(b - 1);
  const std::vector<Eigen::Vector3d> centers = face_barycenters(base_sphere);

  std::vector<TangentPlaneSpec> specs;
  specs.reserve(centers.size());
  for (std::size_t f = 0; f < centers.size(); ++f) {
    TangentPlaneSpec spec;
    spec.face_index = static_cast<int>(f);
    spec.center = to_spherical(centers[f]);
    spec.dim = d;
    spec.half_extent = (d - 1) / (2.0 * d) * extent;
    spec.pitch = extent / d;
    spec.base_level = b;
    spec.source_level = source_level;
    specs.push_back(spec);
  }
  return specs;
}

std::vector<SphericalCoord> plane_pixel_grid(const TangentPlaneSpec& spec) {
  std::vector<SphericalCoord> grid;
  grid.reserve(static_cast<std::size_t>(spec.dim) * spec.dim);
  for (int row = 0; row < spec.dim; ++row) {
    for (int col = 0; col < spec.dim; ++col) {
      grid.push_back(
          gnomonic_inverse(spec.center, spec.pixel_to_plane(col, row)));
    }
  }
  return grid;
}

double axis_fov(const TangentPlaneSpec& spec) {
  return 2.0 * std::atan(spec.half_extent);
}

double edge_fov(const TangentPlaneSpec& spec) {
  const double h = spec.half_extent;
  const Eigen::Vector3d top_left(-h, h, 1.0);
  const Eigen::Vector3d top_right(h, h, 1.0);
  return std::atan2(top_left.cross(top_right).norm(),
                    top_left.dot(top_right));
}

}  // namespace tangent
