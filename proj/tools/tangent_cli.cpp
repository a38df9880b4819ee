// tangent: command-line front end for the tangent-image library.
//
//   tangent icosphere info --level L [--source-level S]
//   tangent to-tangent --input in.png --base-level B --out DIR
//   tangent from-tangent --in DIR --height H --out out.png
//   tangent camnorm --level S --fov-deg F --seed N --intrinsics cam.json ...
//   tangent kp to-sphere | fov-overlap | metrics ...
//
// Results go to stdout as JSON or to files. Failures print
// {"error": {"code": ..., "message": ...}} on stderr.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tangent_c.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = 180.0 / kPi;

struct Failure {
  tgi_status status;
  std::string message;
};

void check(tgi_status status) {
  if (status != TGI_OK) throw Failure{status, tgi_last_error_message()};
}

[[noreturn]] void fail(tgi_status status, std::string message) {
  throw Failure{status, std::move(message)};
}

struct ImageDeleter {
  void operator()(tgi_image* p) const { tgi_image_free(p); }
};
struct SetDeleter {
  void operator()(tgi_tangent_set* p) const { tgi_tangent_set_free(p); }
};
struct SphereDeleter {
  void operator()(tgi_icosphere* p) const { tgi_icosphere_free(p); }
};
using ImagePtr = std::unique_ptr<tgi_image, ImageDeleter>;
using SetPtr = std::unique_ptr<tgi_tangent_set, SetDeleter>;
using SpherePtr = std::unique_ptr<tgi_icosphere, SphereDeleter>;

int exit_code(tgi_status status) {
  const std::string code = tgi_status_code(status);
  if (code.rfind("arg.", 0) == 0) return 2;
  if (code.rfind("format.", 0) == 0) return 3;
  if (code.rfind("io.", 0) == 0) return 4;
  return 1;
}

tgi_channel_kind parse_kind(const std::string& name) {
  if (name == "color8") return TGI_COLOR8;
  if (name == "color16") return TGI_COLOR16;
  if (name == "label8") return TGI_LABEL8;
  if (name == "depth16") return TGI_DEPTH16;
  fail(TGI_ERR_INVALID_ARGUMENT, "unknown channel semantics '" + name + "'");
}

tgi_interp parse_interp(const std::string& name) {
  if (name == "bilinear") return TGI_BILINEAR;
  if (name == "nearest") return TGI_NEAREST;
  fail(TGI_ERR_INVALID_ARGUMENT, "unknown interpolation '" + name + "'");
}

std::string sha256(const std::string& path) {
  char hex[65];
  check(tgi_sha256_file(path.c_str(), hex));
  return hex;
}

ordered_json read_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(TGI_ERR_IO_READ, "cannot open '" + path + "'");
  try {
    return ordered_json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(TGI_ERR_VALIDATION, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) fail(TGI_ERR_IO_WRITE, "cannot write '" + path + "'");
}

// Prints `result` or writes it to `out` when non-empty.
void emit(const ordered_json& result, const std::string& out) {
  if (out.empty()) {
    std::cout << result.dump(2) << '\n';
  } else {
    write_text(out, result.dump(2) + '\n');
  }
}

/*
  Run manifest written next to the outputs. Everything except wall_time_s is
  a function of the command line and the input bytes.
*/
class Manifest {
 public:
  explicit Manifest(std::string command)
      : command_(std::move(command)),
        start_(std::chrono::steady_clock::now()) {}

  ordered_json& params() { return params_; }
  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"sha256", sha256(path)}});
  }
  void output(const std::string& path) { outputs_.push_back(path); }

  void write(const std::string& path) const {
    ordered_json j;
    j["command"] = command_;
    j["version"] = tgi_version();
    j["parameters"] = params_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["wall_time_s"] = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
    write_text(path, j.dump(2) + '\n');
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  ordered_json params_ = ordered_json::object();
  ordered_json inputs_ = ordered_json::array();
  ordered_json outputs_ = ordered_json::array();
};

std::string sidecar(const std::string& path) { return path + ".manifest.json"; }

ImagePtr load_image(const std::string& path, tgi_channel_kind kind,
                    double depth_scale, int invalid_value) {
  tgi_image* img = nullptr;
  if (kind == TGI_DEPTH16) {
    check(tgi_image_load_depth(path.c_str(), depth_scale,
                               static_cast<std::uint16_t>(invalid_value),
                               &img));
  } else {
    check(tgi_image_load(path.c_str(), kind, &img));
  }
  return ImagePtr(img);
}

std::array<double, 12> load_pose(const std::string& path) {
  std::array<double, 12> pose{};
  check(tgi_read_pose(path.c_str(), pose.data()));
  return pose;
}

struct DepthOptions {
  double scale = 1.0 / 512.0;
  int invalid = 65535;

  void add(CLI::App* cmd) {
    cmd->add_option("--depth-scale", scale, "Meters per depth16 unit")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--invalid-value", invalid, "Depth16 invalid sentinel")
        ->check(CLI::Range(0, 65535));
  }
};

// ---------------------------------------------------------------------------

struct IcosphereInfo {
  int level = 0;
  std::optional<int> source_level;
  std::string manifest;

  void run() const {
    Manifest m("icosphere info");
    m.params()["level"] = level;
    tgi_icosphere* raw = nullptr;
    check(tgi_icosphere_build(level, &raw));
    SpherePtr sphere(raw);
    std::uint64_t v = 0, f = 0, e = 0;
    check(tgi_icosphere_counts(sphere.get(), &v, &f, &e));
    double res = 0.0, ratio = 0.0;
    check(tgi_icosphere_vertex_resolution(sphere.get(), &res));
    check(tgi_icosphere_area_ratio(sphere.get(), &ratio));

    ordered_json j;
    j["level"] = level;
    j["vertices"] = v;
    j["faces"] = f;
    j["edges"] = e;
    j["vertex_resolution_deg"] = res * kDeg;
    j["surface_area_ratio"] = ratio;
    const long long h = 1LL << (level + 1);
    j["equirect_height"] = h;
    j["equirect_width"] = 2 * h;
    j["equirect_resolution_deg"] = 360.0 / static_cast<double>(2 * h);
    if (source_level) {
      m.params()["source_level"] = *source_level;
      int dim = 0;
      check(tgi_tangent_dim(*source_level, level, &dim));
      double axis = 0.0, edge = 0.0;
      check(tgi_tangent_fov(level, *source_level, &axis, &edge));
      ordered_json t;
      t["source_level"] = *source_level;
      t["count"] = f;
      t["dim"] = dim;
      t["axis_fov_deg"] = axis * kDeg;
      t["edge_fov_deg"] = edge * kDeg;
      j["tangent_images"] = t;
    }
    emit(j, "");
    if (!manifest.empty()) m.write(manifest);
  }
};

struct ToTangent {
  std::string input, out, interp = "bilinear", channels = "color8";
  int base_level = 0;
  bool exact_depth = false;
  DepthOptions depth;

  void run(int threads) const {
    const tgi_channel_kind kind = parse_kind(channels);
    tgi_interp mode = parse_interp(interp);
    if (kind == TGI_DEPTH16 && exact_depth) mode = TGI_NEAREST;

    Manifest m("to-tangent");
    m.params()["base_level"] = base_level;
    m.params()["interp"] = interp;
    m.params()["channels"] = channels;
    m.params()["exact_depth"] = exact_depth;
    if (kind == TGI_DEPTH16) {
      m.params()["depth_scale"] = depth.scale;
      m.params()["invalid_value"] = depth.invalid;
    }
    m.params()["threads"] = threads;
    m.input(input);

    ImagePtr img = load_image(input, kind, depth.scale, depth.invalid);
    tgi_tangent_set* raw = nullptr;
    check(tgi_to_tangent(img.get(), base_level, mode, threads, &raw));
    SetPtr set(raw);
    check(tgi_tangent_set_save(set.get(), out.c_str()));
    m.output(out);
    m.write((fs::path(out) / "manifest.json").string());
  }
};

struct FromTangent {
  std::string in, out;
  int height = 0;

  void run(int threads) const {
    Manifest m("from-tangent");
    m.params()["height"] = height;
    m.params()["threads"] = threads;
    // Height is checked before the (possibly large) set is read.
    if (height < 2 || (height & (height - 1)) != 0) {
      fail(TGI_ERR_INVALID_ARGUMENT,
           "output height must be a power of two >= 2, got " +
               std::to_string(height));
    }
    tgi_tangent_set* raw = nullptr;
    check(tgi_tangent_set_load(in.c_str(), &raw));
    SetPtr set(raw);
    std::size_t count = 0;
    check(tgi_tangent_set_info(set.get(), &count, nullptr, nullptr, nullptr,
                               nullptr, nullptr));
    m.input((fs::path(in) / "meta.json").string());
    for (std::size_t f = 0; f < count; ++f) {
      char name[32];
      std::snprintf(name, sizeof(name), "face_%05zu.png", f);
      m.input((fs::path(in) / name).string());
    }
    tgi_image* img = nullptr;
    check(tgi_from_tangent(set.get(), height, threads, &img));
    ImagePtr result(img);
    check(tgi_image_save(result.get(), out.c_str()));
    m.output(out);
    m.write(sidecar(out));
  }
};

struct Camnorm {
  int level = 0;
  double fov_deg = 45.0;
  std::uint64_t seed = 0;
  std::string intrinsics, image, out, out_meta, interp = "bilinear",
                                               channels = "color8";

  void run(int threads) const {
    if (image.empty() != out.empty()) {
      fail(TGI_ERR_INVALID_ARGUMENT, "--image and --out must be given together");
    }
    Manifest m("camnorm");
    m.params()["level"] = level;
    m.params()["fov_deg"] = fov_deg;
    m.params()["seed"] = seed;
    m.params()["interp"] = interp;
    m.params()["channels"] = channels;
    m.params()["threads"] = threads;
    m.input(intrinsics);

    const ordered_json k = read_json(intrinsics);
    tgi_camera cam{};
    try {
      cam = {k.at("fx").get<double>(), k.at("fy").get<double>(),
             k.at("cx").get<double>(), k.at("cy").get<double>(),
             k.at("width").get<int>(), k.at("height").get<int>()};
    } catch (const nlohmann::json::exception& e) {
      fail(TGI_ERR_VALIDATION, intrinsics + ": " + e.what());
    }
    const double fov = fov_deg / kDeg;
    tgi_camnorm_target target{};
    check(tgi_camnorm_target_make(level, fov, &target));
    double range[4];
    check(tgi_camnorm_shift_range(&cam, level, fov, range));
    double dx = 0.0, dy = 0.0;
    check(tgi_camnorm_sample_shift(&cam, level, fov, seed, &dx, &dy));
    double map[9];
    check(tgi_camnorm_map(&cam, level, fov, dx, dy, map));
    double ax = 0.0, ay = 0.0;
    check(tgi_angular_resolution(&cam, &ax, &ay));

    if (!image.empty()) {
      m.input(image);
      ImagePtr src = load_image(image, parse_kind(channels), 1.0 / 512.0,
                                65535);
      tgi_image* raw = nullptr;
      check(tgi_camnorm_apply(src.get(), &cam, level, fov, dx, dy,
                              parse_interp(interp), threads, &raw));
      ImagePtr result(raw);
      check(tgi_image_save(result.get(), out.c_str()));
      m.output(out);
    }

    ordered_json j;
    j["source"] = {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
                   {"cy", cam.cy}, {"width", cam.width},
                   {"height", cam.height},
                   {"alpha_x", ax}, {"alpha_y", ay}};
    j["target"] = {{"alpha", target.alpha},
                   {"fov_deg", target.fov * kDeg},
                   {"out_dim", target.out_dim},
                   {"focal", target.focal},
                   {"principal", target.principal}};
    j["seed"] = seed;
    j["shift"] = {{"dx", dx}, {"dy", dy}};
    j["legal_range"] = {{"dx", {range[0], range[1]}},
                        {"dy", {range[2], range[3]}}};
    j["map"] = {{map[0], map[1], map[2]},
                {map[3], map[4], map[5]},
                {map[6], map[7], map[8]}};
    emit(j, out_meta);
    if (!out_meta.empty()) m.output(out_meta);
    const std::string anchor = !out.empty() ? out : out_meta;
    if (!anchor.empty()) m.write(sidecar(anchor));
  }
};

struct KpToSphere {
  std::string input, out, meta;
  int base_level = -1, source_level = -1, equirect_height = 0;

  void run() const {
    Manifest m("kp to-sphere");
    m.input(input);
    int b = base_level, s = source_level, h = equirect_height;
    if (!meta.empty()) {
      const std::string path = (fs::path(meta) / "meta.json").string();
      m.input(path);
      const ordered_json j = read_json(path);
      try {
        b = j.at("base_level").get<int>();
        s = j.at("source_level").get<int>();
        if (h == 0) h = j.value("source_height", 0);
      } catch (const nlohmann::json::exception& e) {
        fail(TGI_ERR_FORMAT_META, path + ": " + e.what());
      }
    }
    if (b < 0 || s < 0) {
      fail(TGI_ERR_INVALID_ARGUMENT,
           "give --meta or both --base-level and --source-level");
    }
    m.params()["base_level"] = b;
    m.params()["source_level"] = s;
    m.params()["equirect_height"] = h;
    std::size_t kept = 0, total = 0;
    check(tgi_kp_to_sphere_file(input.c_str(), b, s, h, out.c_str(), &kept,
                                &total));
    m.output(out);
    m.write(sidecar(out));
    emit({{"total", total}, {"kept", kept}, {"dropped", total - kept}}, "");
  }
};

struct KpFovOverlap {
  std::string depth_a, pose_a, depth_b, pose_b, keypoints_a, keypoints_b, out;
  DepthOptions depth;

  void run(int threads) const {
    Manifest m("kp fov-overlap");
    m.params()["depth_scale"] = depth.scale;
    m.params()["invalid_value"] = depth.invalid;
    m.params()["threads"] = threads;
    for (const auto* p : {&depth_a, &pose_a, &depth_b, &pose_b}) m.input(*p);

    ImagePtr da = load_image(depth_a, TGI_DEPTH16, depth.scale, depth.invalid);
    ImagePtr db = load_image(depth_b, TGI_DEPTH16, depth.scale, depth.invalid);
    const auto pa = load_pose(pose_a);
    const auto pb = load_pose(pose_b);
    double overlap = 0.0, ab = 0.0, ba = 0.0;
    check(tgi_fov_overlap(da.get(), pa.data(), db.get(), pb.data(), threads,
                          &overlap, &ab, &ba));
    ordered_json j;
    j["overlap"] = overlap;
    j["a_in_b"] = ab;
    j["b_in_a"] = ba;
    if (!keypoints_a.empty()) {
      m.input(keypoints_a);
      std::size_t n = 0;
      check(tgi_count_covisible_file(keypoints_a.c_str(), da.get(), pa.data(),
                                     db.get(), pb.data(), &n));
      j["covisible_a"] = n;
    }
    if (!keypoints_b.empty()) {
      m.input(keypoints_b);
      std::size_t n = 0;
      check(tgi_count_covisible_file(keypoints_b.c_str(), db.get(), pb.data(),
                                     da.get(), pa.data(), &n));
      j["covisible_b"] = n;
    }
    emit(j, out);
    if (!out.empty()) {
      m.output(out);
      m.write(sidecar(out));
    }
  }
};

struct KpMetrics {
  std::string input, out;

  void run() const {
    Manifest m("kp metrics");
    m.input(input);
    tgi_metrics r{};
    check(tgi_matching_metrics_file(input.c_str(), &r));
    ordered_json j;
    j["pairs"] = r.pairs;
    j["pmr"] = r.pmr;
    j["ms"] = r.ms;
    j["precision"] = r.precision;
    j["percent"] = {{"pmr", 100.0 * r.pmr},
                    {"ms", 100.0 * r.ms},
                    {"precision", 100.0 * r.precision}};
    emit(j, out);
    if (!out.empty()) {
      m.output(out);
      m.write(sidecar(out));
    }
  }
};

int resolve_threads(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TANGENT_THREADS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 0) return n;
    } catch (const std::exception&) {
    }
    fail(TGI_ERR_INVALID_ARGUMENT,
         std::string("TANGENT_THREADS must be a non-negative integer, got '") +
             env + "'");
  }
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tangent images for spherical data"};
  app.set_version_flag("--version", std::string(tgi_version()));
  app.require_subcommand(1);
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag,
                 "Worker threads (0 = all cores; default $TANGENT_THREADS)")
      ->check(CLI::NonNegativeNumber);
  app.fallthrough();

  IcosphereInfo info;
  auto* ico = app.add_subcommand("icosphere", "Icosphere statistics");
  ico->require_subcommand(1);
  auto* ico_info = ico->add_subcommand("info", "Counts and resolutions");
  ico_info->add_option("--level", info.level, "Subdivision level")
      ->required();
  ico_info->add_option("--source-level", info.source_level,
                       "Also report tangent images for this input level");
  ico_info->add_option("--manifest", info.manifest, "Write a run manifest");

  ToTangent tt;
  auto* to = app.add_subcommand("to-tangent", "Equirect PNG to tangent images");
  to->add_option("--input", tt.input, "Equirectangular PNG")->required();
  to->add_option("--base-level", tt.base_level, "Base level b")->required();
  to->add_option("--out", tt.out, "Output directory")->required();
  to->add_option("--interp", tt.interp, "bilinear or nearest")
      ->capture_default_str();
  to->add_option("--channels", tt.channels,
                 "color8, color16, label8 or depth16")
      ->capture_default_str();
  to->add_flag("--exact-depth", tt.exact_depth,
               "Resample depth with nearest interpolation");
  tt.depth.add(to);

  FromTangent ft;
  auto* from = app.add_subcommand("from-tangent",
                                  "Tangent images back to an equirect PNG");
  from->add_option("--in", ft.in, "Tangent image directory")->required();
  from->add_option("--height", ft.height, "Output height")->required();
  from->add_option("--out", ft.out, "Output PNG")->required();

  Camnorm cn;
  auto* cam = app.add_subcommand("camnorm",
                                 "Normalize a perspective camera");
  cam->add_option("--level", cn.level, "Spherical level s")->required();
  cam->add_option("--fov-deg", cn.fov_deg, "Target field of view, degrees")
      ->capture_default_str();
  cam->add_option("--seed", cn.seed, "Shift RNG seed")->capture_default_str();
  cam->add_option("--intrinsics", cn.intrinsics,
                  "JSON {fx, fy, cx, cy, width, height}")
      ->required();
  cam->add_option("--image", cn.image, "Source PNG");
  cam->add_option("--out", cn.out, "Normalized PNG");
  cam->add_option("--out-meta", cn.out_meta, "Write the result JSON here");
  cam->add_option("--interp", cn.interp, "bilinear or nearest")
      ->capture_default_str();
  cam->add_option("--channels", cn.channels, "Channel semantics of --image")
      ->capture_default_str();

  auto* kp = app.add_subcommand("kp", "Keypoint tools");
  kp->require_subcommand(1);

  KpToSphere ks;
  auto* kts = kp->add_subcommand("to-sphere",
                                 "Reproject keypoints to the sphere");
  kts->add_option("--input", ks.input, "Keypoint JSON lines")->required();
  kts->add_option("--out", ks.out, "Output JSON lines")->required();
  kts->add_option("--meta", ks.meta, "Tangent image directory");
  kts->add_option("--base-level", ks.base_level, "Base level");
  kts->add_option("--source-level", ks.source_level, "Source level");
  kts->add_option("--equirect-height", ks.equirect_height,
                  "Height of the source for equirect keypoints");

  KpFovOverlap ko;
  auto* kfo = kp->add_subcommand("fov-overlap",
                                 "FOV overlap of two posed panoramas");
  kfo->add_option("--depth-a", ko.depth_a, "Depth16 PNG of image a")
      ->required();
  kfo->add_option("--pose-a", ko.pose_a, "Pose JSON of image a")->required();
  kfo->add_option("--depth-b", ko.depth_b, "Depth16 PNG of image b")
      ->required();
  kfo->add_option("--pose-b", ko.pose_b, "Pose JSON of image b")->required();
  kfo->add_option("--keypoints-a", ko.keypoints_a,
                  "Sphere keypoints of a to count as covisible");
  kfo->add_option("--keypoints-b", ko.keypoints_b,
                  "Sphere keypoints of b to count as covisible");
  kfo->add_option("--out", ko.out, "Write the result JSON here");
  ko.depth.add(kfo);

  KpMetrics km;
  auto* kme = kp->add_subcommand("metrics", "PMR, MS and precision");
  kme->add_option("--input", km.input, "JSON array of per-pair rows")
      ->required();
  kme->add_option("--out", km.out, "Write the result JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(tgi_status_code(TGI_ERR_INVALID_ARGUMENT), e.what());
    return 2;
  }

  try {
    const int threads = resolve_threads(threads_flag);
    if (ico_info->parsed()) info.run();
    else if (to->parsed()) tt.run(threads);
    else if (from->parsed()) ft.run(threads);
    else if (cam->parsed()) cn.run(threads);
    else if (kts->parsed()) ks.run();
    else if (kfo->parsed()) ko.run(threads);
    else if (kme->parsed()) km.run();
  } catch (const Failure& f) {
    print_error(tgi_status_code(f.status), f.message);
    return exit_code(f.status);
  } catch (const std::exception& e) {
    print_error(tgi_status_code(TGI_ERR_INTERNAL), e.what());
    return 1;
  }
  return 0;
}
