#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tangent {

using Face = std::array<std::uint32_t, 3>;

inline constexpr int kDefaultMaxIcosphereLevel = 10;

/*
  Subdivided icosahedron with every vertex on the unit sphere.

  The base mesh has two vertices on the +/-z poles (z is the latitude axis).
  Each subdivision splits a face (a, b, c) into four children stored at
  indices 4f .. 4f+3:

      4f+0: (a, ab, ca)    4f+1: (ab, b, bc)
      4f+2: (ca, bc, c)    4f+3: (ab, bc, ca)

  so the parent of face f is f / 4 and the vertex array of level k is a
  prefix of the vertex array of level k + 1. Edge midpoints are appended in
  (min index, max index) order of the edge they bisect and reprojected to
  the sphere.
*/
class Icosphere {
 public:
  static Icosphere build(int level, int max_level = kDefaultMaxIcosphereLevel);

  int level() const { return level_; }
  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t edge_count() const { return adjacency_.size() / 2; }

  std::span<const std::uint32_t> neighbors(std::uint32_t vertex) const {
    return {adjacency_.data() + adjacency_offsets_[vertex],
            adjacency_.data() + adjacency_offsets_[vertex + 1]};
  }

 private:
  Icosphere() = default;

  int level_ = 0;
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Face> faces_;
  // CSR vertex adjacency, neighbors sorted ascending.
  std::vector<std::uint64_t> adjacency_offsets_;
  std::vector<std::uint32_t> adjacency_;
};

/// Mean over vertices of the mean angle (radians) to adjacent vertices.
double vertex_resolution(const Icosphere& sphere);

// Vertex resolution of the level-`level` icosphere, with level -1 defined as
// twice the level-0 value. Levels up to 8 are served from a cache.
double vertex_resolution_at(int level);

/// Chordal mesh area divided by the unit sphere area (4 pi).
double surface_area_ratio(const Icosphere& sphere);

/// Unit barycenter direction of each face, in face order.
std::vector<Eigen::Vector3d> face_barycenters(const Icosphere& sphere);

/*
  Point location on the spherical triangles of an icosphere. The query walks
  the subdivision hierarchy: the lowest-index containing level-0 face, then
  the lowest-index containing child at each level. A direction within 1e-12
  (as a sine of angular distance) of a face boundary counts as contained, so
  ties resolve to the lowest face index, the same answer as a brute-force
  scan of all faces in index order.
*/
class FaceLocator {
 public:
  explicit FaceLocator(const Icosphere& sphere);

  int level() const { return level_; }
  std::size_t face_count() const;

  // Throws kValidation when `direction` is not unit length within 1e-9.
  std::uint32_t locate(const Eigen::Vector3d& direction) const;

  // Skips the unit-norm check; for hot loops over known-unit directions.
  std::uint32_t locate_unchecked(const Eigen::Vector3d& direction) const;

  static constexpr double kBoundaryTolerance = 1e-12;

 private:
  struct EdgePlanes {
    Eigen::Vector3d n0, n1, n2;
  };
  // Inward unit edge-plane normals per face, one array per level 0..level_.
  std::vector<std::vector<EdgePlanes>> planes_;
  int level_ = 0;
};

/// Convenience wrapper: builds a locator and answers one query.
std::uint32_t owning_face(const Icosphere& sphere,
                          const Eigen::Vector3d& direction);

}  // namespace tangent
