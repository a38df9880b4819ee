#include "tangent/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>
#include <Eigen/LU>
#include <openssl/evp.h>

#include "tangent/error.hpp"
#include "tangent/icosphere.hpp"
#include "tangent/parallel.hpp"

namespace tangent {
namespace {

bool pixel_in_grid(double u, double v, int width, int height) {
  return std::isfinite(u) && std::isfinite(v) && u >= -0.5 &&
         u <= width - 0.5 && v >= -0.5 && v <= height - 0.5;
}

std::string describe(const Keypoint& kp, std::size_t index) {
  std::ostringstream os;
  os << "keypoint " << index << " (u=" << kp.u << ", v=" << kp.v << ")";
  return os.str();
}

// Nearest-pixel depth along `dir`; NaN when the pixel holds no depth.
double lookup_depth(const EquirectImage& depth, const Eigen::Vector3d& dir) {
  const Eigen::Vector2d px = depth.to_pixel(to_spherical(dir));
  const int w = depth.width();
  const int h = depth.height();
  int col = static_cast<int>(std::floor(px.x() + 0.5)) % w;
  if (col < 0) col += w;
  const int row =
      std::clamp(static_cast<int>(std::floor(px.y() + 0.5)), 0, h - 1);
  const double d = depth.pixels.at(row, col);
  return std::isfinite(d) && d > 0.0 ? d : std::nan("");
}

// Whether the camera-`self` point at `distance` along `dir` is visible to
// `other`.
bool visible_in(const Eigen::Vector3d& dir, double distance,
                const PosedSphericalImage& self,
                const PosedSphericalImage& other) {
  const Eigen::Vector3d world =
      self.pose.rotation * (distance * dir) + self.pose.translation;
  const Eigen::Vector3d local =
      other.pose.rotation.transpose() * (world - other.pose.translation);
  const double r = local.norm();
  if (!(r > 0.0)) return false;
  const double seen = lookup_depth(other.depth, local / r);
  if (std::isnan(seen)) return false;
  const double tol = std::max(kOcclusionRelativeTolerance * r,
                              kOcclusionAbsoluteTolerance);
  return std::abs(seen - r) <= tol;
}

struct VisibleCount {
  std::int64_t valid = 0;
  std::int64_t visible = 0;
};

VisibleCount count_visible(const PosedSphericalImage& self,
                           const PosedSphericalImage& other, int threads) {
  const int h = self.depth.height();
  const int w = self.depth.width();
  std::vector<VisibleCount> rows(static_cast<std::size_t>(h));
  parallel_for(rows.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      VisibleCount c;
      for (int col = 0; col < w; ++col) {
        const double d = self.depth.pixels.at(static_cast<int>(row), col);
        if (!std::isfinite(d) || d <= 0.0) continue;
        ++c.valid;
        const Eigen::Vector3d dir = to_unit_vector(
            self.depth.pixel_center(static_cast<int>(row), col));
        if (visible_in(dir, d, self, other)) ++c.visible;
      }
      rows[row] = c;
    }
  });
  VisibleCount total;
  for (const auto& c : rows) {
    total.valid += c.valid;
    total.visible += c.visible;
  }
  return total;
}

// Sum of values in ascending order, so permuting the input cannot change
// the rounding.
double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIoRead, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, path + ": " + e.what());
  }
}

}  // namespace

std::vector<Keypoint> keypoints_to_sphere(
    std::span<const Keypoint> keypoints,
    std::span<const TangentPlaneSpec> specs, int equirect_height) {
  std::vector<Keypoint> out;
  out.reserve(keypoints.size());

  std::optional<FaceLocator> locator;
  std::vector<TangentFrame> frames;
  if (!specs.empty()) {
    locator.emplace(Icosphere::build(specs.front().base_level));
    if (locator->face_count() != specs.size()) {
      fail(ErrorCode::kValidation,
           "expected " + std::to_string(locator->face_count()) +
               " plane specs for base level " +
               std::to_string(specs.front().base_level) + ", got " +
               std::to_string(specs.size()));
    }
    frames.reserve(specs.size());
    for (const auto& spec : specs) frames.emplace_back(spec.center);
  }

  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    Keypoint kp = keypoints[i];
    if (kp.source == KeypointSource::kEquirect) {
      if (equirect_height < 1) {
        fail(ErrorCode::kValidation,
             describe(kp, i) + " is an equirect keypoint but no source size "
                               "was given");
      }
      const int w = 2 * equirect_height;
      if (!pixel_in_grid(kp.u, kp.v, w, equirect_height)) {
        fail(ErrorCode::kValidation,
             describe(kp, i) + " lies outside the " +
                 std::to_string(equirect_height) + "x" + std::to_string(w) +
                 " equirect grid");
      }
      kp.spherical = {kPi * (0.5 - (kp.v + 0.5) / equirect_height),
                      wrap_longitude(2.0 * kPi * ((kp.u + 0.5) / w - 0.5))};
      out.push_back(std::move(kp));
      continue;
    }

    if (kp.face_index < 0 ||
        static_cast<std::size_t>(kp.face_index) >= specs.size()) {
      fail(ErrorCode::kValidation,
           describe(kp, i) + " has face index " +
               std::to_string(kp.face_index) + ", valid range is [0, " +
               std::to_string(specs.size()) + ")");
    }
    const TangentPlaneSpec& spec = specs[kp.face_index];
    if (!pixel_in_grid(kp.u, kp.v, spec.dim, spec.dim)) {
      fail(ErrorCode::kValidation,
           describe(kp, i) + " lies outside the " + std::to_string(spec.dim) +
               "x" + std::to_string(spec.dim) + " grid of face " +
               std::to_string(kp.face_index));
    }
    kp.spherical = gnomonic_inverse(spec.center, spec.pixel_to_plane(kp.u, kp.v));
    const Eigen::Vector3d dir =
        frames[kp.face_index].unproject(spec.pixel_to_plane(kp.u, kp.v));
    if (locator->locate_unchecked(dir) ==
        static_cast<std::uint32_t>(kp.face_index)) {
      out.push_back(std::move(kp));
    }
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  if (bytes.empty()) return out;
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.empty()) return {};
  auto bad = [] { fail(ErrorCode::kValidation, "malformed base64 descriptor"); };
  if (text.size() % 4 != 0) bad();
  std::size_t padding = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '=') {
      if (i + 2 < text.size()) bad();
      ++padding;
    } else if (padding > 0 ||
               !(std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
                 c == '/')) {
      bad();
    }
  }
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(
      out.data(), reinterpret_cast<const unsigned char*>(text.data()),
      static_cast<int>(text.size()));
  if (n < 0) bad();
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::vector<Keypoint> read_keypoints_jsonl(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIoRead, "cannot open '" + path + "'");
  std::vector<Keypoint> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Keypoint kp;
      const std::string source = j.at("source").get<std::string>();
      if (source == "tangent") {
        kp.source = KeypointSource::kTangent;
        kp.face_index = j.at("face_index").get<int>();
      } else if (source == "equirect") {
        kp.source = KeypointSource::kEquirect;
      } else {
        fail(ErrorCode::kValidation, where + "unknown source '" + source + "'");
      }
      kp.u = j.at("u").get<double>();
      kp.v = j.at("v").get<double>();
      kp.scale = j.value("scale", 0.0);
      kp.orientation = j.value("orientation", 0.0);
      kp.descriptor = base64_decode(j.value("descriptor", std::string()));
      if (j.contains("lat") && j.contains("lon")) {
        kp.spherical = {j["lat"].get<double>(), j["lon"].get<double>()};
      }
      out.push_back(std::move(kp));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kValidation, where + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kValidation) throw;
      const std::string msg = e.what();
      fail(ErrorCode::kValidation,
           msg.rfind(where, 0) == 0 ? msg : where + msg);
    }
  }
  return out;
}

void write_keypoints_jsonl(const std::string& path,
                           std::span<const Keypoint> keypoints) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::kIoWrite, "cannot write '" + path + "'");
  for (const auto& kp : keypoints) {
    nlohmann::ordered_json j;
    if (kp.source == KeypointSource::kTangent) {
      j["source"] = "tangent";
      j["face_index"] = kp.face_index;
    } else {
      j["source"] = "equirect";
    }
    j["u"] = kp.u;
    j["v"] = kp.v;
    j["scale"] = kp.scale;
    j["orientation"] = kp.orientation;
    j["descriptor"] = base64_encode(kp.descriptor);
    j["lat"] = kp.spherical.lat;
    j["lon"] = kp.spherical.lon;
    os << j.dump() << '\n';
  }
  if (!os) fail(ErrorCode::kIoWrite, "cannot write '" + path + "'");
}

void validate(const PosedSphericalImage& image) {
  const auto& d = image.depth;
  check_equirect_shape(d.height(), d.width());
  if (d.channels() != 1) {
    fail(ErrorCode::kValidation, "depth map must have exactly one channel");
  }
  if (!image.color.pixels.samples.empty() &&
      (image.color.height() != d.height() || image.color.width() != d.width())) {
    fail(ErrorCode::kValidation,
         "color and depth dimensions differ");
  }
  const Eigen::Matrix3d& r = image.pose.rotation;
  const double err =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-9) || !(r.determinant() > 0.0) ||
      !image.pose.translation.allFinite()) {
    fail(ErrorCode::kValidation,
         "pose rotation must be orthonormal with determinant +1");
  }
}

Pose read_pose_json(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  Pose pose;
  try {
    const auto& rot = j.at("rotation");
    const auto& t = j.at("translation");
    if (rot.size() != 3 || t.size() != 3) {
      fail(ErrorCode::kValidation,
           path + ": rotation must be 3x3 and translation 3-vector");
    }
    for (int i = 0; i < 3; ++i) {
      if (rot[i].size() != 3) {
        fail(ErrorCode::kValidation, path + ": rotation must be 3x3");
      }
      for (int k = 0; k < 3; ++k) pose.rotation(i, k) = rot[i][k].get<double>();
      pose.translation(i) = t[i].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, path + ": " + e.what());
  }
  return pose;
}

OverlapResult fov_overlap(const PosedSphericalImage& a,
                          const PosedSphericalImage& b, int threads) {
  validate(a);
  validate(b);
  const VisibleCount ab = count_visible(a, b, threads);
  const VisibleCount ba = count_visible(b, a, threads);
  if (ab.valid == 0 || ba.valid == 0) {
    fail(ErrorCode::kUndefinedOverlap,
         std::string("depth map of image ") + (ab.valid == 0 ? "a" : "b") +
             " has no valid pixel");
  }
  OverlapResult r;
  r.a_in_b = static_cast<double>(ab.visible) / static_cast<double>(ab.valid);
  r.b_in_a = static_cast<double>(ba.visible) / static_cast<double>(ba.valid);
  r.overlap = 0.5 * (r.a_in_b + r.b_in_a);
  return r;
}

std::size_t count_covisible(std::span<const Keypoint> keypoints,
                            const PosedSphericalImage& self,
                            const PosedSphericalImage& other) {
  validate(self);
  validate(other);
  std::size_t n = 0;
  for (const auto& kp : keypoints) {
    const Eigen::Vector3d dir = to_unit_vector(kp.spherical);
    const double d = lookup_depth(self.depth, dir);
    if (!std::isnan(d) && visible_in(dir, d, self, other)) ++n;
  }
  return n;
}

PairMetrics pair_metrics(const MatchStats& s) {
  const std::string pair = "pair " + std::to_string(s.pair_id);
  if (s.p <= 0 || s.n_left <= 0 || s.n_right <= 0) {
    fail(ErrorCode::kInvalidEntry,
         pair + ": p, n_left and n_right must be positive (p=" +
             std::to_string(s.p) + ", n_left=" + std::to_string(s.n_left) +
             ", n_right=" + std::to_string(s.n_right) + ")");
  }
  if (s.f < 0 || s.f > s.p) {
    fail(ErrorCode::kInvalidEntry,
         pair + ": f=" + std::to_string(s.f) + " must lie in [0, p=" +
             std::to_string(s.p) + "]");
  }
  const double p = static_cast<double>(s.p);
  const double f = static_cast<double>(s.f);
  const double nl = static_cast<double>(s.n_left);
  const double nr = static_cast<double>(s.n_right);
  return {s.pair_id, 0.5 * (p / nl + p / nr), 0.5 * (f / nl + f / nr), f / p};
}

MatchingMetrics aggregate_metrics(std::span<const PairMetrics> pairs) {
  if (pairs.empty()) {
    fail(ErrorCode::kInvalidEntry, "metrics need at least one pair");
  }
  std::vector<double> pmr, ms, precision;
  for (const auto& m : pairs) {
    if (!std::isfinite(m.pmr) || !std::isfinite(m.ms) ||
        !std::isfinite(m.precision) || m.pmr < 0.0 || m.ms < 0.0 ||
        m.precision < 0.0 || m.precision > 1.0) {
      fail(ErrorCode::kInvalidEntry,
           "pair " + std::to_string(m.pair_id) +
               ": metrics must be finite and non-negative with precision <= 1");
    }
    pmr.push_back(m.pmr);
    ms.push_back(m.ms);
    precision.push_back(m.precision);
  }
  const double n = static_cast<double>(pairs.size());
  return {canonical_sum(std::move(pmr)) / n, canonical_sum(std::move(ms)) / n,
          canonical_sum(std::move(precision)) / n, pairs.size()};
}

MatchingMetrics matching_metrics(std::span<const MatchStats> stats) {
  std::vector<PairMetrics> pairs;
  pairs.reserve(stats.size());
  for (const auto& s : stats) pairs.push_back(pair_metrics(s));
  return aggregate_metrics(pairs);
}

std::vector<MatchStats> read_match_stats(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_array()) fail(ErrorCode::kValidation, path + ": expected an array");
  std::vector<MatchStats> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      const auto& row = j[i];
      out.push_back({row.value("pair_id", static_cast<std::int64_t>(i)),
                     row.at("p").get<std::int64_t>(),
                     row.at("f").get<std::int64_t>(),
                     row.at("n_left").get<std::int64_t>(),
                     row.at("n_right").get<std::int64_t>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kInvalidEntry,
           path + ": row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PairMetrics> read_pair_metrics(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_array()) fail(ErrorCode::kValidation, path + ": expected an array");
  std::vector<PairMetrics> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      const auto& row = j[i];
      const auto id = row.value("pair_id", static_cast<std::int64_t>(i));
      if (row.contains("p")) {
        out.push_back(pair_metrics({id, row.at("p").get<std::int64_t>(),
                                    row.at("f").get<std::int64_t>(),
                                    row.at("n_left").get<std::int64_t>(),
                                    row.at("n_right").get<std::int64_t>()}));
      } else {
        out.push_back({id, row.at("pmr").get<double>(),
                       row.at("ms").get<double>(),
                       row.at("precision").get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kInvalidEntry,
           path + ": row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tangent
