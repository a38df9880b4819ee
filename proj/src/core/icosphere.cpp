#include "tangent/icosphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include <Eigen/Geometry>

#include "tangent/error.hpp"

namespace tangent {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<std::uint64_t> unique_edges(const std::vector<Face>& faces) {
  std::vector<std::uint64_t> keys;
  keys.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    keys.push_back(edge_key(f[0], f[1]));
    keys.push_back(edge_key(f[1], f[2]));
    keys.push_back(edge_key(f[2], f[0]));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

void base_icosahedron(std::vector<Eigen::Vector3d>& vertices,
                      std::vector<Face>& faces) {
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  vertices.clear();
  vertices.emplace_back(0.0, 0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double lon = 2.0 * kPi * k / 5.0;
    vertices.emplace_back(r * std::cos(lon), r * std::sin(lon), z);
  }
  for (int k = 0; k < 5; ++k) {
    const double lon = 2.0 * kPi * k / 5.0 + kPi / 5.0;
    vertices.emplace_back(r * std::cos(lon), r * std::sin(lon), -z);
  }
  vertices.emplace_back(0.0, 0.0, -1.0);

  faces.clear();
  for (std::uint32_t k = 0; k < 5; ++k) {
    const std::uint32_t u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const std::uint32_t l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    faces.push_back({0, u0, u1});
    faces.push_back({u0, l0, u1});
    faces.push_back({u1, l0, l1});
    faces.push_back({11, l1, l0});
  }
}

double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

Icosphere Icosphere::build(int level, int max_level) {
  if (level < 0) {
    fail(ErrorCode::kInvalidArgument,
         "icosphere level must be non-negative, got " + std::to_string(level));
  }
  if (level > max_level) {
    fail(ErrorCode::kResourceLimit,
         "icosphere level " + std::to_string(level) + " exceeds the limit of " +
             std::to_string(max_level));
  }

  Icosphere sphere;
  sphere.level_ = level;
  base_icosahedron(sphere.vertices_, sphere.faces_);

  for (int step = 0; step < level; ++step) {
    const std::vector<std::uint64_t> edges = unique_edges(sphere.faces_);
    const auto old_count = static_cast<std::uint32_t>(sphere.vertices_.size());
    sphere.vertices_.reserve(old_count + edges.size());
    for (const std::uint64_t key : edges) {
      const auto a = static_cast<std::uint32_t>(key >> 32);
      const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
      sphere.vertices_.push_back(
          (sphere.vertices_[a] + sphere.vertices_[b]).normalized());
    }
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto it =
          std::lower_bound(edges.begin(), edges.end(), edge_key(a, b));
      return old_count + static_cast<std::uint32_t>(it - edges.begin());
    };

    std::vector<Face> next;
    next.reserve(sphere.faces_.size() * 4);
    for (const Face& f : sphere.faces_) {
      const std::uint32_t ab = midpoint(f[0], f[1]);
      const std::uint32_t bc = midpoint(f[1], f[2]);
      const std::uint32_t ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({ab, f[1], bc});
      next.push_back({ca, bc, f[2]});
      next.push_back({ab, bc, ca});
    }
    sphere.faces_ = std::move(next);
  }

  const std::vector<std::uint64_t> edges = unique_edges(sphere.faces_);
  const std::size_t n = sphere.vertices_.size();
  sphere.adjacency_offsets_.assign(n + 1, 0);
  for (const std::uint64_t key : edges) {
    ++sphere.adjacency_offsets_[(key >> 32) + 1];
    ++sphere.adjacency_offsets_[(key & 0xffffffffu) + 1];
  }
  for (std::size_t v = 0; v < n; ++v) {
    sphere.adjacency_offsets_[v + 1] += sphere.adjacency_offsets_[v];
  }
  sphere.adjacency_.resize(edges.size() * 2);
  std::vector<std::uint64_t> cursor(sphere.adjacency_offsets_.begin(),
                                    sphere.adjacency_offsets_.end() - 1);
  for (const std::uint64_t key : edges) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    sphere.adjacency_[cursor[a]++] = b;
    sphere.adjacency_[cursor[b]++] = a;
  }
  return sphere;
}

double vertex_resolution(const Icosphere& sphere) {
  const auto& verts = sphere.vertices();
  double total = 0.0;
  for (std::uint32_t v = 0; v < verts.size(); ++v) {
    const auto adj = sphere.neighbors(v);
    double sum = 0.0;
    for (const std::uint32_t w : adj) sum += vector_angle(verts[v], verts[w]);
    total += sum / static_cast<double>(adj.size());
  }
  return total / static_cast<double>(verts.size());
}

double vertex_resolution_at(int level) {
  if (level < -1) {
    fail(ErrorCode::kInvalidArgument,
         "vertex resolution is defined for levels >= -1, got " +
             std::to_string(level));
  }
  if (level == -1) return 2.0 * vertex_resolution_at(0);

  constexpr int kCached = 8;
  if (level > kCached) return vertex_resolution(Icosphere::build(level));

  static std::once_flag flags[kCached + 1];
  static double values[kCached + 1];
  std::call_once(flags[level], [level] {
    values[level] = vertex_resolution(Icosphere::build(level));
  });
  return values[level];
}

double surface_area_ratio(const Icosphere& sphere) {
  const auto& verts = sphere.vertices();
  double area = 0.0;
  for (const Face& f : sphere.faces()) {
    area += 0.5 * (verts[f[1]] - verts[f[0]])
                      .cross(verts[f[2]] - verts[f[0]])
                      .norm();
  }
  return area / (4.0 * kPi);
}

std::vector<Eigen::Vector3d> face_barycenters(const Icosphere& sphere) {
  const auto& verts = sphere.vertices();
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(sphere.faces().size());
  for (const Face& f : sphere.faces()) {
    centers.push_back((verts[f[0]] + verts[f[1]] + verts[f[2]]).normalized());
  }
  return centers;
}

FaceLocator::FaceLocator(const Icosphere& sphere) : level_(sphere.level()) {
  const auto& verts = sphere.vertices();
  const auto& faces = sphere.faces();
  planes_.resize(static_cast<std::size_t>(level_) + 1);
  for (int k = 0; k <= level_; ++k) {
    const int depth = level_ - k;
    const std::uint64_t span = std::uint64_t{1} << (2 * depth);  // 4^depth
    const std::uint64_t repeat = (span - 1) / 3;
    const std::size_t count = 20 * (std::size_t{1} << (2 * k));
    auto& level_planes = planes_[k];
    level_planes.resize(count);
    for (std::size_t g = 0; g < count; ++g) {
      // Corner i of an ancestor face is corner i of its descendant reached by
      // always taking child i.
      const Eigen::Vector3d& a = verts[faces[g * span][0]];
      const Eigen::Vector3d& b = verts[faces[g * span + repeat][1]];
      const Eigen::Vector3d& c = verts[faces[g * span + 2 * repeat][2]];
      level_planes[g] = {a.cross(b).normalized(), b.cross(c).normalized(),
                         c.cross(a).normalized()};
    }
  }
}

std::size_t FaceLocator::face_count() const { return planes_.back().size(); }

std::uint32_t FaceLocator::locate(const Eigen::Vector3d& direction) const {
  const double norm = direction.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9) {
    fail(ErrorCode::kValidation,
         "direction must be unit length within 1e-9, norm is " +
             std::to_string(norm));
  }
  return locate_unchecked(direction);
}

std::uint32_t FaceLocator::locate_unchecked(
    const Eigen::Vector3d& p) const {
  auto pick = [&](const std::vector<EdgePlanes>& planes, std::size_t first,
                  std::size_t count) {
    std::size_t best = first;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i < first + count; ++i) {
      const EdgePlanes& e = planes[i];
      const double margin =
          std::min({p.dot(e.n0), p.dot(e.n1), p.dot(e.n2)});
      if (margin >= -kBoundaryTolerance) return i;
      if (margin > best_margin) {
        best_margin = margin;
        best = i;
      }
    }
    return best;
  };

  std::size_t face = pick(planes_[0], 0, 20);
  for (int k = 1; k <= level_; ++k) face = pick(planes_[k], face * 4, 4);
  return static_cast<std::uint32_t>(face);
}

std::uint32_t owning_face(const Icosphere& sphere,
                          const Eigen::Vector3d& direction) {
  return FaceLocator(sphere).locate(direction);
}

}  // namespace tangent
