#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tangent/gnomonic.hpp"
#include "tangent/image.hpp"

namespace tangent {

// ---------------------------------------------------------------------------
// Keypoints

enum class KeypointSource { kEquirect, kTangent };

// Pixel coordinates (u = column, v = row) follow the detector convention of
// integer values at pixel centers.
struct Keypoint {
  KeypointSource source = KeypointSource::kTangent;
  int face_index = -1;  // tangent keypoints only
  double u = 0.0;
  double v = 0.0;
  double scale = 0.0;
  double orientation = 0.0;
  std::vector<std::uint8_t> descriptor;
  SphericalCoord spherical;  // filled by keypoints_to_sphere
};

/*
  Computes the sphere position of every keypoint and drops tangent keypoints
  whose direction is owned by a different base face than the one they were
  detected on, which removes duplicates from overlapping tangent images.
  Equirect keypoints are converted with the given source size and kept.
  Errors: kValidation for a bad face index, a pixel outside its grid, or an
  equirect keypoint without a source size.
*/
std::vector<Keypoint> keypoints_to_sphere(
    std::span<const Keypoint> keypoints,
    std::span<const TangentPlaneSpec> specs, int equirect_height = 0);

// JSON lines: {source, face_index?, u, v, scale, orientation,
// descriptor (base64)} plus lat/lon (radians) on output; lat/lon are read
// back when present.
std::vector<Keypoint> read_keypoints_jsonl(const std::string& path);
void write_keypoints_jsonl(const std::string& path,
                           std::span<const Keypoint> keypoints);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws kValidation on malformed input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

// ---------------------------------------------------------------------------
// Posed panoramas and FOV overlap

// World <- camera rigid transform: X_world = rotation * X_cam + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// `depth` holds metric distance along each pixel ray, NaN where invalid.
struct PosedSphericalImage {
  EquirectImage color;  // optional; empty when only geometry is needed
  EquirectImage depth;
  Pose pose;
};

void validate(const PosedSphericalImage& image);

// Reads {"rotation": [[...], [...], [...]], "translation": [x, y, z]}.
Pose read_pose_json(const std::string& path);

// Points match when |depth - distance| <= max(3% of distance, 5 cm).
inline constexpr double kOcclusionRelativeTolerance = 0.03;
inline constexpr double kOcclusionAbsoluteTolerance = 0.05;

struct OverlapResult {
  double overlap = 0.0;  // mean of the two directional fractions
  double a_in_b = 0.0;   // fraction of a's valid points visible to b
  double b_in_a = 0.0;
};

// Throws kUndefinedOverlap when either depth map has no valid pixel.
OverlapResult fov_overlap(const PosedSphericalImage& a,
                          const PosedSphericalImage& b, int threads = 0);

// Number of `keypoints` (spherical positions in `self`) whose back-projected
// point is visible to `other`.
std::size_t count_covisible(std::span<const Keypoint> keypoints,
                            const PosedSphericalImage& self,
                            const PosedSphericalImage& other);

// ---------------------------------------------------------------------------
// Matching metrics

struct MatchStats {
  std::int64_t pair_id = 0;
  std::int64_t p = 0;  // putative correspondences
  std::int64_t f = 0;  // inlier matches
  std::int64_t n_left = 0;
  std::int64_t n_right = 0;
};

struct PairMetrics {
  std::int64_t pair_id = 0;
  double pmr = 0.0;
  double ms = 0.0;
  double precision = 0.0;
};

struct MatchingMetrics {
  double pmr = 0.0;
  double ms = 0.0;
  double precision = 0.0;
  std::size_t pairs = 0;
};

// Throws kInvalidEntry naming the pair when p, n_left or n_right is not
// positive or f lies outside [0, p].
PairMetrics pair_metrics(const MatchStats& stats);

// Means over pairs, summed in sorted order so the result does not depend on
// the order of the list. Throws kInvalidEntry for an empty list.
MatchingMetrics aggregate_metrics(std::span<const PairMetrics> pairs);
MatchingMetrics matching_metrics(std::span<const MatchStats> stats);

// JSON array of {pair_id, p, f, n_left, n_right}.
std::vector<MatchStats> read_match_stats(const std::string& path);
// JSON array whose rows are either count rows as above or precomputed
// per-pair metrics {pair_id, pmr, ms, precision}.
std::vector<PairMetrics> read_pair_metrics(const std::string& path);

}  // namespace tangent
