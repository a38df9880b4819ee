#ifndef TANGENT_C_H
#define TANGENT_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TGI_BUILDING)
#    define TGI_API __declspec(dllexport)
#  else
#    define TGI_API __declspec(dllimport)
#  endif
#else
#  define TGI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returns TGI_OK or an error status; the message of the most
   recent failure on the calling thread is available from
   tgi_last_error_message(). Output parameters are untouched on failure. */
typedef enum tgi_status {
  TGI_OK = 0,
  TGI_ERR_INVALID_ARGUMENT,
  TGI_ERR_RESOURCE_LIMIT,
  TGI_ERR_VALIDATION,
  TGI_ERR_OUT_OF_HEMISPHERE,
  TGI_ERR_COVERAGE,
  TGI_ERR_FORMAT_ASPECT,
  TGI_ERR_FORMAT_DIMENSIONS,
  TGI_ERR_FORMAT_BIT_DEPTH,
  TGI_ERR_FORMAT_META,
  TGI_ERR_IO_READ,
  TGI_ERR_IO_WRITE,
  TGI_ERR_RANGE,
  TGI_ERR_SOURCE_TOO_NARROW,
  TGI_ERR_INVALID_ENTRY,
  TGI_ERR_UNDEFINED_OVERLAP,
  TGI_ERR_INTERNAL
} tgi_status;

typedef enum tgi_channel_kind {
  TGI_COLOR8 = 0,
  TGI_COLOR16,
  TGI_LABEL8,
  TGI_DEPTH16
} tgi_channel_kind;

typedef enum tgi_interp { TGI_BILINEAR = 0, TGI_NEAREST } tgi_interp;

/* Stable code string such as "format.aspect". */
TGI_API const char* tgi_status_code(tgi_status status);
TGI_API const char* tgi_last_error_message(void);
TGI_API const char* tgi_version(void);

/* ---- icosphere --------------------------------------------------------- */

typedef struct tgi_icosphere tgi_icosphere;

TGI_API tgi_status tgi_icosphere_build(int level, tgi_icosphere** out);
TGI_API void tgi_icosphere_free(tgi_icosphere* sphere);
TGI_API tgi_status tgi_icosphere_counts(const tgi_icosphere* sphere,
                                        uint64_t* vertices, uint64_t* faces,
                                        uint64_t* edges);
/* xyz receives 3 * vertices doubles. */
TGI_API tgi_status tgi_icosphere_vertices(const tgi_icosphere* sphere,
                                          double* xyz, size_t capacity);
/* indices receives 3 * faces values. */
TGI_API tgi_status tgi_icosphere_faces(const tgi_icosphere* sphere,
                                       uint32_t* indices, size_t capacity);
/* Mean angle between adjacent vertices, radians. */
TGI_API tgi_status tgi_icosphere_vertex_resolution(const tgi_icosphere* sphere,
                                                   double* radians);
TGI_API tgi_status tgi_icosphere_area_ratio(const tgi_icosphere* sphere,
                                            double* ratio);
/* (x, y, z) must be unit length. */
TGI_API tgi_status tgi_icosphere_owning_face(const tgi_icosphere* sphere,
                                             double x, double y, double z,
                                             uint32_t* face);

/* ---- gnomonic projection and tangent planes ----------------------------- */

typedef struct tgi_plane_spec {
  int face_index;
  double center_lat; /* radians */
  double center_lon;
  int dim;
  double half_extent;
  double pitch;
  int base_level;
  int source_level;
} tgi_plane_spec;

TGI_API tgi_status tgi_gnomonic_forward(double center_lat, double center_lon,
                                        double lat, double lon, double* x,
                                        double* y);
TGI_API tgi_status tgi_gnomonic_inverse(double center_lat, double center_lon,
                                        double x, double y, double* lat,
                                        double* lon);
TGI_API tgi_status tgi_tangent_dim(int source_level, int base_level, int* dim);
/* Writes 20 * 4^base_level specs; `capacity` is in specs. */
TGI_API tgi_status tgi_plane_specs(int base_level, int source_level,
                                   tgi_plane_spec* specs, size_t capacity);
/* Field of view of face 0's grid: along its axis and along one edge. */
TGI_API tgi_status tgi_tangent_fov(int base_level, int source_level,
                                   double* axis_fov, double* edge_fov);

/* ---- images ------------------------------------------------------------- */

/* Row-major H x W x C float samples with channel semantics. */
typedef struct tgi_image tgi_image;

/* `samples` may be NULL for a zero-filled image. */
TGI_API tgi_status tgi_image_create(int height, int width, int channels,
                                    tgi_channel_kind kind,
                                    const float* samples, tgi_image** out);
TGI_API tgi_status tgi_image_load(const char* path, tgi_channel_kind kind,
                                  tgi_image** out);
/* Depth16 PNG with an explicit encoding (meters per unit, invalid sentinel). */
TGI_API tgi_status tgi_image_load_depth(const char* path, double depth_scale,
                                        uint16_t invalid_value,
                                        tgi_image** out);
TGI_API tgi_status tgi_image_save(const tgi_image* image, const char* path);
TGI_API void tgi_image_free(tgi_image* image);
TGI_API tgi_status tgi_image_shape(const tgi_image* image, int* height,
                                   int* width, int* channels);
TGI_API tgi_status tgi_image_kind(const tgi_image* image,
                                  tgi_channel_kind* kind);
/* Valid until the image is freed. */
TGI_API float* tgi_image_data(tgi_image* image);
/* Depth16 encoding used when saving; defaults are 1/512 m and 65535. */
TGI_API tgi_status tgi_image_set_depth_encoding(tgi_image* image,
                                                double depth_scale,
                                                uint16_t invalid_value);

/* ---- tangent image sets -------------------------------------------------- */

typedef struct tgi_tangent_set tgi_tangent_set;

/* threads = 0 uses hardware parallelism. */
TGI_API tgi_status tgi_to_tangent(const tgi_image* equirect, int base_level,
                                  tgi_interp interp, int threads,
                                  tgi_tangent_set** out);
TGI_API tgi_status tgi_from_tangent(const tgi_tangent_set* set, int out_height,
                                    int threads, tgi_image** out);
TGI_API tgi_status tgi_tangent_set_save(const tgi_tangent_set* set,
                                        const char* dir);
TGI_API tgi_status tgi_tangent_set_load(const char* dir,
                                        tgi_tangent_set** out);
TGI_API void tgi_tangent_set_free(tgi_tangent_set* set);
TGI_API tgi_status tgi_tangent_set_info(const tgi_tangent_set* set,
                                        size_t* count, int* dim,
                                        int* channels, int* base_level,
                                        int* source_level, tgi_interp* interp);
TGI_API tgi_status tgi_tangent_set_spec(const tgi_tangent_set* set,
                                        size_t face, tgi_plane_spec* spec);
/* dim * dim * channels floats, valid until the set is freed. */
TGI_API const float* tgi_tangent_set_face(const tgi_tangent_set* set,
                                          size_t face);

/* ---- camera normalization ------------------------------------------------ */

typedef struct tgi_camera {
  double fx, fy, cx, cy;
  int width, height;
} tgi_camera;

typedef struct tgi_camnorm_target {
  double alpha; /* radians per pixel */
  double fov;   /* snapped to out_dim * alpha */
  int out_dim;
  double focal;
  double principal;
} tgi_camnorm_target;

TGI_API tgi_status tgi_angular_resolution(const tgi_camera* camera,
                                          double* alpha_x, double* alpha_y);
TGI_API tgi_status tgi_camnorm_target_make(int spherical_level, double fov,
                                           tgi_camnorm_target* out);
/* range = {min_dx, max_dx, min_dy, max_dy}. */
TGI_API tgi_status tgi_camnorm_shift_range(const tgi_camera* camera,
                                           int spherical_level, double fov,
                                           double range[4]);
TGI_API tgi_status tgi_camnorm_sample_shift(const tgi_camera* camera,
                                            int spherical_level, double fov,
                                            uint64_t seed, double* dx,
                                            double* dy);
/* Row-major 3x3 map from target pixel coordinates to source coordinates. */
TGI_API tgi_status tgi_camnorm_map(const tgi_camera* camera,
                                   int spherical_level, double fov, double dx,
                                   double dy, double matrix[9]);
TGI_API tgi_status tgi_camnorm_apply(const tgi_image* source,
                                     const tgi_camera* camera,
                                     int spherical_level, double fov,
                                     double dx, double dy, tgi_interp interp,
                                     int threads, tgi_image** out);

/* ---- keypoints, overlap and metrics ------------------------------------- */

/* Reprojects a JSON-lines keypoint file to the sphere. Tangent keypoints use
   the planes of (base_level, source_level); equirect keypoints use
   equirect_height (0 if there are none). */
TGI_API tgi_status tgi_kp_to_sphere_file(const char* input_path,
                                         int base_level, int source_level,
                                         int equirect_height,
                                         const char* output_path,
                                         size_t* kept, size_t* total);

/* pose = row-major rotation (9) followed by translation (3), world <- camera.
   Depth images hold metric distance, NaN where invalid. */
TGI_API tgi_status tgi_fov_overlap(const tgi_image* depth_a,
                                   const double pose_a[12],
                                   const tgi_image* depth_b,
                                   const double pose_b[12], int threads,
                                   double* overlap, double* a_in_b,
                                   double* b_in_a);
TGI_API tgi_status tgi_read_pose(const char* path, double pose[12]);
/* Keypoints of image a (JSON lines with lat/lon) visible to image b. */
TGI_API tgi_status tgi_count_covisible_file(const char* keypoints_path,
                                            const tgi_image* depth_a,
                                            const double pose_a[12],
                                            const tgi_image* depth_b,
                                            const double pose_b[12],
                                            size_t* count);

typedef struct tgi_match_stats {
  int64_t pair_id;
  int64_t p;
  int64_t f;
  int64_t n_left;
  int64_t n_right;
} tgi_match_stats;

typedef struct tgi_metrics {
  double pmr;
  double ms;
  double precision;
  size_t pairs;
} tgi_metrics;

TGI_API tgi_status tgi_matching_metrics(const tgi_match_stats* stats,
                                        size_t count, tgi_metrics* out);
/* Accepts count rows or precomputed per-pair metric rows. */
TGI_API tgi_status tgi_matching_metrics_file(const char* path,
                                             tgi_metrics* out);

/* ---- utilities ---------------------------------------------------------- */

/* Lowercase hex digest plus terminator. */
TGI_API tgi_status tgi_sha256_file(const char* path, char hex[65]);

#ifdef __cplusplus
}
#endif

#endif /* TANGENT_C_H */
