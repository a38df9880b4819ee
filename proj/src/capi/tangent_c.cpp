#include "tangent_c.h"

#include <array>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "tangent/camnorm.hpp"
#include "tangent/error.hpp"
#include "tangent/features.hpp"
#include "tangent/gnomonic.hpp"
#include "tangent/icosphere.hpp"
#include "tangent/imageio.hpp"
#include "tangent/resample.hpp"

#ifndef TANGENT_VERSION
#define TANGENT_VERSION "0.0.0"
#endif

using namespace tangent;

struct tgi_icosphere {
  Icosphere sphere;
  FaceLocator locator;
};

struct tgi_image {
  EquirectImage image;
};

struct tgi_tangent_set {
  TangentImageSet set;
};

namespace {

thread_local std::string g_last_error;

tgi_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return TGI_ERR_INVALID_ARGUMENT;
    case ErrorCode::kResourceLimit: return TGI_ERR_RESOURCE_LIMIT;
    case ErrorCode::kValidation: return TGI_ERR_VALIDATION;
    case ErrorCode::kOutOfHemisphere: return TGI_ERR_OUT_OF_HEMISPHERE;
    case ErrorCode::kCoverageViolation: return TGI_ERR_COVERAGE;
    case ErrorCode::kFormatAspect: return TGI_ERR_FORMAT_ASPECT;
    case ErrorCode::kFormatDimensions: return TGI_ERR_FORMAT_DIMENSIONS;
    case ErrorCode::kFormatBitDepth: return TGI_ERR_FORMAT_BIT_DEPTH;
    case ErrorCode::kFormatMeta: return TGI_ERR_FORMAT_META;
    case ErrorCode::kIoRead: return TGI_ERR_IO_READ;
    case ErrorCode::kIoWrite: return TGI_ERR_IO_WRITE;
    case ErrorCode::kRange: return TGI_ERR_RANGE;
    case ErrorCode::kSourceTooNarrow: return TGI_ERR_SOURCE_TOO_NARROW;
    case ErrorCode::kInvalidEntry: return TGI_ERR_INVALID_ENTRY;
    case ErrorCode::kUndefinedOverlap: return TGI_ERR_UNDEFINED_OVERLAP;
    case ErrorCode::kInternal: return TGI_ERR_INTERNAL;
  }
  return TGI_ERR_INTERNAL;
}

template <typename Fn>
tgi_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TGI_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TGI_ERR_RESOURCE_LIMIT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TGI_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

ChannelKind to_kind(tgi_channel_kind kind) {
  switch (kind) {
    case TGI_COLOR8: return ChannelKind::kColor8;
    case TGI_COLOR16: return ChannelKind::kColor16;
    case TGI_LABEL8: return ChannelKind::kLabel8;
    case TGI_DEPTH16: return ChannelKind::kDepth16;
  }
  fail(ErrorCode::kInvalidArgument, "unknown channel kind");
}

tgi_channel_kind from_kind(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kColor8: return TGI_COLOR8;
    case ChannelKind::kColor16: return TGI_COLOR16;
    case ChannelKind::kLabel8: return TGI_LABEL8;
    case ChannelKind::kDepth16: return TGI_DEPTH16;
  }
  return TGI_COLOR8;
}

Interp to_interp(tgi_interp mode) {
  if (mode == TGI_BILINEAR) return Interp::kBilinear;
  if (mode == TGI_NEAREST) return Interp::kNearest;
  fail(ErrorCode::kInvalidArgument, "unknown interpolation mode");
}

CameraIntrinsics to_camera(const tgi_camera* c) {
  require(c != nullptr, "camera is null");
  return {c->fx, c->fy, c->cx, c->cy, c->width, c->height};
}

Pose to_pose(const double* p) {
  require(p != nullptr, "pose is null");
  Pose pose;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) pose.rotation(i, k) = p[3 * i + k];
    pose.translation(i) = p[9 + i];
  }
  return pose;
}

PosedSphericalImage posed(const tgi_image* depth, const double* pose) {
  require(depth != nullptr, "depth image is null");
  return {EquirectImage{}, depth->image, to_pose(pose)};
}

tgi_plane_spec to_c(const TangentPlaneSpec& s) {
  return {s.face_index, s.center.lat, s.center.lon, s.dim,
          s.half_extent, s.pitch, s.base_level, s.source_level};
}

}  // namespace

extern "C" {

const char* tgi_status_code(tgi_status status) {
  switch (status) {
    case TGI_OK: return "ok";
    case TGI_ERR_INVALID_ARGUMENT: return "arg.invalid";
    case TGI_ERR_RESOURCE_LIMIT: return "arg.resource_limit";
    case TGI_ERR_VALIDATION: return "arg.validation";
    case TGI_ERR_OUT_OF_HEMISPHERE: return "geom.out_of_hemisphere";
    case TGI_ERR_COVERAGE: return "internal.coverage";
    case TGI_ERR_FORMAT_ASPECT: return "format.aspect";
    case TGI_ERR_FORMAT_DIMENSIONS: return "format.dimensions";
    case TGI_ERR_FORMAT_BIT_DEPTH: return "format.bit_depth";
    case TGI_ERR_FORMAT_META: return "format.meta";
    case TGI_ERR_IO_READ: return "io.unreadable";
    case TGI_ERR_IO_WRITE: return "io.write";
    case TGI_ERR_RANGE: return "format.range";
    case TGI_ERR_SOURCE_TOO_NARROW: return "camnorm.source_too_narrow";
    case TGI_ERR_INVALID_ENTRY: return "metrics.invalid_entry";
    case TGI_ERR_UNDEFINED_OVERLAP: return "overlap.undefined";
    case TGI_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* tgi_last_error_message(void) { return g_last_error.c_str(); }

const char* tgi_version(void) { return TANGENT_VERSION; }

// ---- icosphere

tgi_status tgi_icosphere_build(int level, tgi_icosphere** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    Icosphere sphere = Icosphere::build(level);
    FaceLocator locator(sphere);
    *out = new tgi_icosphere{std::move(sphere), std::move(locator)};
  });
}

void tgi_icosphere_free(tgi_icosphere* sphere) { delete sphere; }

tgi_status tgi_icosphere_counts(const tgi_icosphere* s, uint64_t* vertices,
                                uint64_t* faces, uint64_t* edges) {
  return guarded([&] {
    require(s != nullptr, "icosphere is null");
    if (vertices) *vertices = s->sphere.vertices().size();
    if (faces) *faces = s->sphere.faces().size();
    if (edges) *edges = s->sphere.edge_count();
  });
}

tgi_status tgi_icosphere_vertices(const tgi_icosphere* s, double* xyz,
                                  size_t capacity) {
  return guarded([&] {
    require(s != nullptr && xyz != nullptr, "null argument");
    const auto& v = s->sphere.vertices();
    require(capacity >= 3 * v.size(), "vertex buffer too small");
    for (std::size_t i = 0; i < v.size(); ++i) {
      xyz[3 * i] = v[i].x();
      xyz[3 * i + 1] = v[i].y();
      xyz[3 * i + 2] = v[i].z();
    }
  });
}

tgi_status tgi_icosphere_faces(const tgi_icosphere* s, uint32_t* indices,
                               size_t capacity) {
  return guarded([&] {
    require(s != nullptr && indices != nullptr, "null argument");
    const auto& f = s->sphere.faces();
    require(capacity >= 3 * f.size(), "face buffer too small");
    std::memcpy(indices, f.data(), f.size() * sizeof(Face));
  });
}

tgi_status tgi_icosphere_vertex_resolution(const tgi_icosphere* s,
                                           double* radians) {
  return guarded([&] {
    require(s != nullptr && radians != nullptr, "null argument");
    *radians = vertex_resolution(s->sphere);
  });
}

tgi_status tgi_icosphere_area_ratio(const tgi_icosphere* s, double* ratio) {
  return guarded([&] {
    require(s != nullptr && ratio != nullptr, "null argument");
    *ratio = surface_area_ratio(s->sphere);
  });
}

tgi_status tgi_icosphere_owning_face(const tgi_icosphere* s, double x,
                                     double y, double z, uint32_t* face) {
  return guarded([&] {
    require(s != nullptr && face != nullptr, "null argument");
    *face = s->locator.locate({x, y, z});
  });
}

// ---- gnomonic

tgi_status tgi_gnomonic_forward(double center_lat, double center_lon,
                                double lat, double lon, double* x, double* y) {
  return guarded([&] {
    require(x != nullptr && y != nullptr, "null argument");
    const PlanePoint p =
        gnomonic_forward({center_lat, center_lon}, {lat, lon});
    *x = p.x;
    *y = p.y;
  });
}

tgi_status tgi_gnomonic_inverse(double center_lat, double center_lon,
                                double x, double y, double* lat, double* lon) {
  return guarded([&] {
    require(lat != nullptr && lon != nullptr, "null argument");
    const SphericalCoord c = gnomonic_inverse({center_lat, center_lon}, {x, y});
    *lat = c.lat;
    *lon = c.lon;
  });
}

tgi_status tgi_tangent_dim(int source_level, int base_level, int* dim) {
  return guarded([&] {
    require(dim != nullptr, "null argument");
    *dim = tangent_dim(source_level, base_level);
  });
}

tgi_status tgi_plane_specs(int base_level, int source_level,
                           tgi_plane_spec* specs, size_t capacity) {
  return guarded([&] {
    require(specs != nullptr, "null argument");
    tangent_dim(source_level, base_level);
    const auto all =
        make_plane_specs(Icosphere::build(base_level), source_level);
    require(capacity >= all.size(), "spec buffer too small");
    for (std::size_t i = 0; i < all.size(); ++i) specs[i] = to_c(all[i]);
  });
}

tgi_status tgi_tangent_fov(int base_level, int source_level, double* axis,
                           double* edge) {
  return guarded([&] {
    tangent_dim(source_level, base_level);
    const auto specs =
        make_plane_specs(Icosphere::build(base_level), source_level);
    if (axis) *axis = axis_fov(specs.front());
    if (edge) *edge = edge_fov(specs.front());
  });
}

// ---- images

tgi_status tgi_image_create(int height, int width, int channels,
                            tgi_channel_kind kind, const float* samples,
                            tgi_image** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    require(height >= 1 && width >= 1 && channels >= 1 && channels <= 4,
            "image needs height, width >= 1 and 1-4 channels");
    auto img = std::make_unique<tgi_image>();
    img->image.semantics.kind = to_kind(kind);
    img->image.pixels = Image(height, width, channels);
    if (samples) {
      std::memcpy(img->image.pixels.samples.data(), samples,
                  img->image.pixels.samples.size() * sizeof(float));
    }
    *out = img.release();
  });
}

tgi_status tgi_image_load(const char* path, tgi_channel_kind kind,
                          tgi_image** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto img = std::make_unique<tgi_image>();
    img->image.semantics.kind = to_kind(kind);
    img->image.pixels = read_png(path, img->image.semantics);
    *out = img.release();
  });
}

tgi_status tgi_image_load_depth(const char* path, double depth_scale,
                                uint16_t invalid_value, tgi_image** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    require(depth_scale > 0.0, "depth_scale must be positive");
    auto img = std::make_unique<tgi_image>();
    img->image.semantics = {ChannelKind::kDepth16, depth_scale, invalid_value};
    img->image.pixels = read_png(path, img->image.semantics);
    *out = img.release();
  });
}

tgi_status tgi_image_save(const tgi_image* image, const char* path) {
  return guarded([&] {
    require(image != nullptr && path != nullptr, "null argument");
    write_png(image->image.pixels, path, image->image.semantics);
  });
}

void tgi_image_free(tgi_image* image) { delete image; }

tgi_status tgi_image_shape(const tgi_image* image, int* height, int* width,
                           int* channels) {
  return guarded([&] {
    require(image != nullptr, "image is null");
    if (height) *height = image->image.height();
    if (width) *width = image->image.width();
    if (channels) *channels = image->image.channels();
  });
}

tgi_status tgi_image_kind(const tgi_image* image, tgi_channel_kind* kind) {
  return guarded([&] {
    require(image != nullptr && kind != nullptr, "null argument");
    *kind = from_kind(image->image.semantics.kind);
  });
}

float* tgi_image_data(tgi_image* image) {
  return image ? image->image.pixels.samples.data() : nullptr;
}

tgi_status tgi_image_set_depth_encoding(tgi_image* image, double depth_scale,
                                        uint16_t invalid_value) {
  return guarded([&] {
    require(image != nullptr, "image is null");
    require(depth_scale > 0.0, "depth_scale must be positive");
    image->image.semantics.depth_scale = depth_scale;
    image->image.semantics.invalid_value = invalid_value;
  });
}

// ---- tangent sets

tgi_status tgi_to_tangent(const tgi_image* equirect, int base_level,
                          tgi_interp interp, int threads,
                          tgi_tangent_set** out) {
  return guarded([&] {
    require(equirect != nullptr && out != nullptr, "null argument");
    auto set = std::make_unique<tgi_tangent_set>();
    set->set = to_tangent(equirect->image, base_level, to_interp(interp),
                          threads);
    *out = set.release();
  });
}

tgi_status tgi_from_tangent(const tgi_tangent_set* set, int out_height,
                            int threads, tgi_image** out) {
  return guarded([&] {
    require(set != nullptr && out != nullptr, "null argument");
    FromTangentOptions options;
    options.threads = threads;
    auto img = std::make_unique<tgi_image>();
    img->image = from_tangent(set->set, out_height, options);
    *out = img.release();
  });
}

tgi_status tgi_tangent_set_save(const tgi_tangent_set* set, const char* dir) {
  return guarded([&] {
    require(set != nullptr && dir != nullptr, "null argument");
    save_tangent_set(set->set, dir);
  });
}

tgi_status tgi_tangent_set_load(const char* dir, tgi_tangent_set** out) {
  return guarded([&] {
    require(dir != nullptr && out != nullptr, "null argument");
    auto set = std::make_unique<tgi_tangent_set>();
    set->set = load_tangent_set(dir);
    *out = set.release();
  });
}

void tgi_tangent_set_free(tgi_tangent_set* set) { delete set; }

tgi_status tgi_tangent_set_info(const tgi_tangent_set* set, size_t* count,
                                int* dim, int* channels, int* base_level,
                                int* source_level, tgi_interp* interp) {
  return guarded([&] {
    require(set != nullptr, "set is null");
    const auto& s = set->set;
    if (count) *count = s.specs.size();
    if (dim) *dim = s.dim();
    if (channels) *channels = s.channels();
    if (base_level) *base_level = s.provenance.base_level;
    if (source_level) *source_level = s.provenance.source_level;
    if (interp) {
      *interp = s.provenance.interp == Interp::kNearest ? TGI_NEAREST
                                                        : TGI_BILINEAR;
    }
  });
}

tgi_status tgi_tangent_set_spec(const tgi_tangent_set* set, size_t face,
                                tgi_plane_spec* spec) {
  return guarded([&] {
    require(set != nullptr && spec != nullptr, "null argument");
    require(face < set->set.specs.size(), "face index out of range");
    *spec = to_c(set->set.specs[face]);
  });
}

const float* tgi_tangent_set_face(const tgi_tangent_set* set, size_t face) {
  if (!set || face >= set->set.images.size()) return nullptr;
  return set->set.images[face].samples.data();
}

// ---- camnorm

tgi_status tgi_angular_resolution(const tgi_camera* camera, double* alpha_x,
                                  double* alpha_y) {
  return guarded([&] {
    const AngularResolution r = angular_resolution(to_camera(camera));
    if (alpha_x) *alpha_x = r.x;
    if (alpha_y) *alpha_y = r.y;
  });
}

tgi_status tgi_camnorm_target_make(int spherical_level, double fov,
                                   tgi_camnorm_target* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    const NormalizationTarget t = make_target(spherical_level, fov);
    *out = {t.alpha, t.fov, t.out_dim, t.focal(), t.principal()};
  });
}

tgi_status tgi_camnorm_shift_range(const tgi_camera* camera,
                                   int spherical_level, double fov,
                                   double range[4]) {
  return guarded([&] {
    require(range != nullptr, "range is null");
    const ShiftRange r = legal_shift_range(to_camera(camera),
                                           make_target(spherical_level, fov));
    range[0] = r.min_dx;
    range[1] = r.max_dx;
    range[2] = r.min_dy;
    range[3] = r.max_dy;
  });
}

tgi_status tgi_camnorm_sample_shift(const tgi_camera* camera,
                                    int spherical_level, double fov,
                                    uint64_t seed, double* dx, double* dy) {
  return guarded([&] {
    require(dx != nullptr && dy != nullptr, "null argument");
    const Shift s = sample_shift(to_camera(camera),
                                 make_target(spherical_level, fov), seed);
    *dx = s.dx;
    *dy = s.dy;
  });
}

tgi_status tgi_camnorm_map(const tgi_camera* camera, int spherical_level,
                           double fov, double dx, double dy,
                           double matrix[9]) {
  return guarded([&] {
    require(matrix != nullptr, "matrix is null");
    const PixelMap map = normalize_camera(
        to_camera(camera), make_target(spherical_level, fov), {dx, dy});
    const Eigen::Matrix3d m = map.matrix();
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) matrix[3 * i + k] = m(i, k);
    }
  });
}

tgi_status tgi_camnorm_apply(const tgi_image* source, const tgi_camera* camera,
                             int spherical_level, double fov, double dx,
                             double dy, tgi_interp interp, int threads,
                             tgi_image** out) {
  return guarded([&] {
    require(source != nullptr && out != nullptr, "null argument");
    const CameraIntrinsics cam = to_camera(camera);
    if (cam.width != source->image.width() ||
        cam.height != source->image.height()) {
      fail(ErrorCode::kInvalidArgument,
           "intrinsics size " + std::to_string(cam.width) + "x" +
               std::to_string(cam.height) + " does not match the image " +
               std::to_string(source->image.width()) + "x" +
               std::to_string(source->image.height()));
    }
    const NormalizationTarget target = make_target(spherical_level, fov);
    const PixelMap map = normalize_camera(cam, target, {dx, dy});
    auto img = std::make_unique<tgi_image>();
    img->image.semantics = source->image.semantics;
    img->image.pixels =
        apply_pixel_map(source->image.pixels, map, target.out_dim,
                        effective_interp(to_interp(interp),
                                         source->image.semantics),
                        threads);
    *out = img.release();
  });
}

// ---- features

tgi_status tgi_kp_to_sphere_file(const char* input_path, int base_level,
                                 int source_level, int equirect_height,
                                 const char* output_path, size_t* kept,
                                 size_t* total) {
  return guarded([&] {
    require(input_path != nullptr && output_path != nullptr, "null argument");
    tangent_dim(source_level, base_level);
    const auto keypoints = read_keypoints_jsonl(input_path);
    const auto specs =
        make_plane_specs(Icosphere::build(base_level), source_level);
    const auto out = keypoints_to_sphere(keypoints, specs, equirect_height);
    write_keypoints_jsonl(output_path, out);
    if (kept) *kept = out.size();
    if (total) *total = keypoints.size();
  });
}

tgi_status tgi_fov_overlap(const tgi_image* depth_a, const double pose_a[12],
                           const tgi_image* depth_b, const double pose_b[12],
                           int threads, double* overlap, double* a_in_b,
                           double* b_in_a) {
  return guarded([&] {
    const OverlapResult r =
        fov_overlap(posed(depth_a, pose_a), posed(depth_b, pose_b), threads);
    if (overlap) *overlap = r.overlap;
    if (a_in_b) *a_in_b = r.a_in_b;
    if (b_in_a) *b_in_a = r.b_in_a;
  });
}

tgi_status tgi_read_pose(const char* path, double pose[12]) {
  return guarded([&] {
    require(path != nullptr && pose != nullptr, "null argument");
    const Pose p = read_pose_json(path);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) pose[3 * i + k] = p.rotation(i, k);
      pose[9 + i] = p.translation(i);
    }
  });
}

tgi_status tgi_count_covisible_file(const char* keypoints_path,
                                    const tgi_image* depth_a,
                                    const double pose_a[12],
                                    const tgi_image* depth_b,
                                    const double pose_b[12], size_t* count) {
  return guarded([&] {
    require(keypoints_path != nullptr && count != nullptr, "null argument");
    const auto kps = read_keypoints_jsonl(keypoints_path);
    *count = count_covisible(kps, posed(depth_a, pose_a),
                             posed(depth_b, pose_b));
  });
}

tgi_status tgi_matching_metrics(const tgi_match_stats* stats, size_t count,
                                tgi_metrics* out) {
  return guarded([&] {
    require(out != nullptr && (stats != nullptr || count == 0),
            "null argument");
    std::vector<MatchStats> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      rows.push_back({stats[i].pair_id, stats[i].p, stats[i].f,
                      stats[i].n_left, stats[i].n_right});
    }
    const MatchingMetrics m = matching_metrics(rows);
    *out = {m.pmr, m.ms, m.precision, m.pairs};
  });
}

tgi_status tgi_matching_metrics_file(const char* path, tgi_metrics* out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const MatchingMetrics m = aggregate_metrics(read_pair_metrics(path));
    *out = {m.pmr, m.ms, m.precision, m.pairs};
  });
}

// ---- utilities

tgi_status tgi_sha256_file(const char* path, char hex[65]) {
  return guarded([&] {
    require(path != nullptr && hex != nullptr, "null argument");
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::kIoRead, std::string("cannot open '") + path + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
        EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      fail(ErrorCode::kInternal, "sha256 init failed");
    }
    std::array<char, 1 << 16> buf;
    while (is) {
      is.read(buf.data(), buf.size());
      if (is.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buf.data(),
                         static_cast<std::size_t>(is.gcount()));
      }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* kHex = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
      hex[2 * i] = kHex[digest[i] >> 4];
      hex[2 * i + 1] = kHex[digest[i] & 15];
    }
    hex[2 * len] = '\0';
  });
}

}  // extern "C"
