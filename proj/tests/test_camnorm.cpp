#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tangent/camnorm.hpp"
#include "tangent/error.hpp"
#include "test_util.hpp"

using namespace tangent;

namespace {

constexpr double kDeg = kPi / 180.0;

// Pinhole camera with the given horizontal/vertical FOV and principal point.
CameraIntrinsics camera_with_fov(int w, int h, double fov_x, double fov_y,
                                 double cx, double cy) {
  return {w / (2 * std::tan(fov_x / 2)), h / (2 * std::tan(fov_y / 2)), cx, cy,
          w, h};
}

// Independent footprint check: the four corners of the target image,
// mapped as x = K (K' + shift)^-1 x', must land inside [0, W] x [0, H].
bool footprint_inside(const CameraIntrinsics& src, const NormalizationTarget& t,
                      const Shift& s, double tol) {
  const double fp = t.out_dim / (2 * std::tan(t.fov / 2));
  const double cp = t.out_dim / 2.0;
  for (double xp : {0.0, static_cast<double>(t.out_dim)}) {
    for (double yp : {0.0, static_cast<double>(t.out_dim)}) {
      const double x = src.fx * (xp - cp) / fp + src.cx + s.dx;
      const double y = src.fy * (yp - cp) / fp + src.cy + s.dy;
      if (x < -tol || x > src.width + tol || y < -tol || y > src.height + tol) {
        return false;
      }
    }
  }
  return true;
}

CameraIntrinsics random_camera(std::mt19937_64& rng, double min_fov) {
  std::uniform_int_distribution<int> dim(32, 2048);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int w = dim(rng), h = dim(rng);
  const double fx = min_fov + u(rng) * (170 * kDeg - min_fov);
  const double fy = min_fov + u(rng) * (170 * kDeg - min_fov);
  // Off-center principal points only widen the legal interval.
  return camera_with_fov(w, h, fx, fy, w * (0.3 + 0.4 * u(rng)),
                         h * (0.3 + 0.4 * u(rng)));
}

}  // namespace

TEST(AngularResolution, WorkedExample) {
  const double f = 128 / (2 * std::tan(kPi / 8));
  EXPECT_NEAR(f, 154.51, 5e-3);
  const auto a = angular_resolution({f, f, 64, 64, 128, 128});
  EXPECT_NEAR(a.x, (kPi / 4) / 128, 1e-15);
  EXPECT_NEAR(a.y, (kPi / 4) / 128, 1e-15);
}

TEST(AngularResolution, TelephotoLimitAndAnisotropy) {
  const auto tele = angular_resolution({1e12, 1e12, 50, 50, 100, 100});
  EXPECT_LT(tele.x, 1e-11);
  EXPECT_GT(tele.x, 0.0);
  const auto an = angular_resolution({100, 200, 50, 50, 100, 100});
  EXPECT_NEAR(an.x, 2 * std::atan(0.5) / 100, 1e-15);
  EXPECT_NEAR(an.y, 2 * std::atan(0.25) / 100, 1e-15);
  EXPECT_THROW(angular_resolution({0, 1, 0, 0, 10, 10}), Error);
  EXPECT_THROW(angular_resolution({1, 1, 0, 0, 0, 10}), Error);
}

TEST(Target, LevelEightMatchesEquirectResolution) {
  const auto t = make_target(8, kPi / 4);
  EXPECT_NEAR(t.alpha, 2 * kPi / 1024, 1e-15);
  EXPECT_NEAR(t.alpha / kDeg, 0.352, 1e-3);
  EXPECT_EQ(t.out_dim, 128);
  EXPECT_NEAR(t.fov, kPi / 4, 1e-15);
  const double f = 128 / (2 * std::tan(22.5 * kDeg));
  EXPECT_NEAR(t.focal() / f, 1.0, 1e-6);
  EXPECT_EQ(t.principal(), 64.0);
}

TEST(Target, OtherLevels) {
  EXPECT_EQ(make_target(10, kPi / 4).out_dim, 512);
  const double alpha = 2 * kPi / 4096;
  EXPECT_EQ(make_target(10, alpha).out_dim, 1);
  EXPECT_THROW(make_target(-1, 1.0), Error);
  EXPECT_THROW(make_target(8, 0.0), Error);
  EXPECT_THROW(make_target(8, kPi), Error);
  EXPECT_THROW(make_target(0, 0.1), Error);  // under half a pixel
}

TEST(Target, InternallyConsistent) {
  for (int s = 4; s <= 12; ++s) {
    for (double fov_deg : {10.0, 33.3, 45.0, 60.0, 90.0, 120.0}) {
      const auto t = make_target(s, fov_deg * kDeg);
      EXPECT_EQ(t.out_dim, std::lround(fov_deg * kDeg / t.alpha));
      EXPECT_NEAR(t.fov / t.out_dim / t.alpha, 1.0, 5e-3);
      const auto a = angular_resolution(t.camera());
      EXPECT_NEAR(a.x / t.alpha, 1.0, 1e-9);
      EXPECT_NEAR(a.y / t.alpha, 1.0, 1e-9);
    }
  }
}

TEST(ShiftRange, ClosedFormBounds) {
  const CameraIntrinsics src{500, 450, 310, 250, 640, 480};
  const auto t = make_target(8, kPi / 4);
  const auto r = legal_shift_range(src, t);
  const double fp = t.focal(), cp = t.principal(), w = t.out_dim;
  EXPECT_NEAR(r.min_dx, src.fx / fp * cp - src.cx, 1e-12);
  EXPECT_NEAR(r.max_dx, src.width - src.cx - src.fx / fp * (w - cp), 1e-12);
  EXPECT_NEAR(r.min_dy, src.fy / fp * cp - src.cy, 1e-12);
  EXPECT_NEAR(r.max_dy, src.height - src.cy - src.fy / fp * (w - cp), 1e-12);
  // The interval ends put the footprint exactly on the image border.
  for (double dx : {r.min_dx, r.max_dx}) {
    for (double dy : {r.min_dy, r.max_dy}) {
      EXPECT_TRUE(footprint_inside(src, t, {dx, dy}, 1e-9));
    }
  }
  EXPECT_FALSE(footprint_inside(src, t, {r.min_dx - 1e-3, 0}, 0.0));
  EXPECT_FALSE(footprint_inside(src, t, {0, r.max_dy + 1e-3}, 0.0));
}

TEST(NormalizeCamera, IdentityWhenTargetEqualsSource) {
  const auto t = make_target(8, kPi / 4);
  const auto map = normalize_camera(t.camera(), t, {0, 0});
  EXPECT_TRUE(map.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  for (double x : {0.0, 17.25, 128.0}) {
    for (double y : {0.0, 99.5, 128.0}) {
      const auto p = map({x, y});
      EXPECT_NEAR(p.x(), x, 1e-9);
      EXPECT_NEAR(p.y(), y, 1e-9);
    }
  }
}

TEST(NormalizeCamera, SymmetricCornersForCenteredCameras) {
  const auto src = camera_with_fov(800, 600, 90 * kDeg, 70 * kDeg, 400, 300);
  const auto t = make_target(8, kPi / 4);
  const auto map = normalize_camera(src, t, {0, 0});
  const auto a = map({0, 0});
  const auto b = map({128, 128});
  const auto c = map({128, 0});
  const auto d = map({0, 128});
  EXPECT_NEAR(a.x() + b.x(), 800, 1e-9);
  EXPECT_NEAR(a.y() + b.y(), 600, 1e-9);
  EXPECT_NEAR(c.x() + d.x(), 800, 1e-9);
  EXPECT_NEAR(c.y() + d.y(), 600, 1e-9);
  // Matches the homography K (K')^-1.
  const Eigen::Matrix3d h = src.matrix() * t.camera().matrix().inverse();
  EXPECT_TRUE(map.matrix().isApprox(h, 1e-12));
}

TEST(NormalizeCamera, RejectsIllegalShiftWithInterval) {
  const CameraIntrinsics src{500, 500, 320, 240, 640, 480};
  const auto t = make_target(8, kPi / 4);
  const auto r = legal_shift_range(src, t);
  try {
    normalize_camera(src, t, {r.max_dx + 1.0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("legal range"), std::string::npos);
  }
  EXPECT_NO_THROW(normalize_camera(src, t, {r.max_dx, r.min_dy}));
}

TEST(SampleShift, SeededDrawsStayInBounds) {
  std::mt19937_64 rng(2024);
  const auto t = make_target(8, kPi / 4);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto src = random_camera(rng, t.fov + 1 * kDeg);
    const Shift s = sample_shift(src, t, seed);
    ASSERT_TRUE(footprint_inside(src, t, s, 1e-9 * std::max(src.width, src.height)))
        << seed;
    ASSERT_NO_THROW(normalize_camera(src, t, s));
  }
}

TEST(SampleShift, DeterministicAndSpread) {
  const CameraIntrinsics src{300, 300, 320, 240, 640, 480};
  const auto t = make_target(8, kPi / 4);
  const Shift a = sample_shift(src, t, 99);
  const Shift b = sample_shift(src, t, 99);
  EXPECT_EQ(a.dx, b.dx);
  EXPECT_EQ(a.dy, b.dy);
  const auto r = legal_shift_range(src, t);
  double lo = 1e9, hi = -1e9;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const double dx = sample_shift(src, t, seed).dx;
    lo = std::min(lo, dx);
    hi = std::max(hi, dx);
  }
  const double width = r.max_dx - r.min_dx;
  EXPECT_LT(lo - r.min_dx, 0.01 * width);
  EXPECT_LT(r.max_dx - hi, 0.01 * width);
}

TEST(SampleShift, ExactFitForcesZeroWidthInterval) {
  const auto t = make_target(8, kPi / 4);
  const auto src = t.camera();
  const Shift s = sample_shift(src, t, 5);
  EXPECT_NEAR(s.dx, 0.0, 1e-9);
  EXPECT_NEAR(s.dy, 0.0, 1e-9);
}

TEST(SampleShift, SourceTooNarrow) {
  const auto t = make_target(8, kPi / 4);
  const auto src = camera_with_fov(640, 480, 40 * kDeg, 60 * kDeg, 320, 240);
  try {
    sample_shift(src, t, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSourceTooNarrow);
  }
}

TEST(ApplyMap, IdempotentOnNormalizedImage) {
  const auto t = make_target(6, kPi / 4);
  Image img(t.out_dim, t.out_dim, 2);
  std::mt19937_64 rng(3);
  for (auto& v : img.samples) v = static_cast<float>((rng() % 1000) / 1000.0);
  const auto map = normalize_camera(t.camera(), t, {0, 0});
  for (const auto mode : {Interp::kBilinear, Interp::kNearest}) {
    const auto out = apply_pixel_map(img, map, t.out_dim, mode);
    ASSERT_EQ(out.samples.size(), img.samples.size());
    for (std::size_t k = 0; k < img.samples.size(); ++k) {
      ASSERT_NEAR(out.samples[k], img.samples[k], 1e-6);
    }
  }
}

TEST(ApplyMap, DownscalesConstantAndIsThreadInvariant) {
  const auto src = camera_with_fov(400, 300, 100 * kDeg, 80 * kDeg, 200, 150);
  const auto t = make_target(8, kPi / 4);
  const auto map = normalize_camera(src, t, sample_shift(src, t, 11));
  const Image flat(300, 400, 3, 0.25f);
  const auto out = apply_pixel_map(flat, map, t.out_dim, Interp::kBilinear, 4);
  EXPECT_EQ(out.height, 128);
  EXPECT_EQ(out.width, 128);
  for (float v : out.samples) ASSERT_EQ(v, 0.25f);

  const auto img = testutil::rasterize(150, testutil::band_limited, 3).pixels;
  EXPECT_EQ(apply_pixel_map(img, map, 128, Interp::kBilinear, 1).samples,
            apply_pixel_map(img, map, 128, Interp::kBilinear, 8).samples);
}
