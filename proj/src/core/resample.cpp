#include "tangent/resample.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tangent/error.hpp"
#include "tangent/icosphere.hpp"
#include "tangent/imageio.hpp"
#include "tangent/parallel.hpp"

namespace tangent {
namespace {

constexpr double kRadToDeg = 180.0 / kPi;

void sample_equirect(const EquirectImage& img, const SphericalCoord& c,
                     Interp mode, float* out) {
  const Eigen::Vector2d px = img.to_pixel(c);
  sample(img.pixels, px.x(), px.y(), mode, ColumnBorder::kWrap, out);
}

}  // namespace

Interp effective_interp(Interp requested, const ChannelSemantics& semantics) {
  return semantics.is_label() ? Interp::kNearest : requested;
}

TangentImageSet to_tangent(const EquirectImage& image, int base_level,
                           Interp interp, int threads) {
  const int s = equirect_level(image.height(), image.width());
  if (base_level < 0 || base_level > s) {
    fail(ErrorCode::kInvalidArgument,
         "base level " + std::to_string(base_level) +
             " must lie in [0, " + std::to_string(s) +
             "] for a level-" + std::to_string(s) + " input");
  }
  const Interp mode = effective_interp(interp, image.semantics);

  TangentImageSet set;
  set.specs = make_plane_specs(Icosphere::build(base_level), s);
  set.semantics = image.semantics;
  set.provenance = {image.height(), image.width(), base_level, s, mode};

  const int d = set.specs.front().dim;
  const int c = image.channels();
  set.images.assign(set.specs.size(), Image(d, d, c));

  parallel_for(set.specs.size(), threads, [&](std::size_t begin,
                                              std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      const std::vector<SphericalCoord> grid = plane_pixel_grid(set.specs[f]);
      Image& out = set.images[f];
      for (std::size_t k = 0; k < grid.size(); ++k) {
        sample_equirect(image, grid[k], mode, &out.samples[k * c]);
      }
    }
  });
  return set;
}

void validate_tangent_set(const TangentImageSet& set) {
  auto bad = [](const std::string& what) { fail(ErrorCode::kFormatMeta, what); };
  const auto& prov = set.provenance;
  if (prov.base_level < 0 || prov.source_level < prov.base_level) {
    bad("provenance levels are inconsistent");
  }
  const std::size_t expected = 20 * (std::size_t{1} << (2 * prov.base_level));
  if (set.specs.size() != expected) {
    bad("expected " + std::to_string(expected) + " specs for base level " +
        std::to_string(prov.base_level) + ", found " +
        std::to_string(set.specs.size()));
  }
  if (set.images.size() != set.specs.size()) {
    bad("found " + std::to_string(set.images.size()) + " images for " +
        std::to_string(set.specs.size()) + " specs");
  }
  const int d = tangent_dim(prov.source_level, prov.base_level);
  for (std::size_t f = 0; f < set.specs.size(); ++f) {
    const auto& spec = set.specs[f];
    const auto& img = set.images[f];
    if (spec.dim != d || spec.face_index != static_cast<int>(f) ||
        spec.base_level != prov.base_level ||
        spec.source_level != prov.source_level) {
      bad("spec " + std::to_string(f) + " disagrees with provenance");
    }
    if (img.height != d || img.width != d ||
        img.channels != set.images.front().channels || img.channels < 1) {
      bad("tangent image " + std::to_string(f) + " has shape " +
          std::to_string(img.height) + "x" + std::to_string(img.width) + "x" +
          std::to_string(img.channels) + ", expected " + std::to_string(d) +
          "x" + std::to_string(d));
    }
  }
}

EquirectImage from_tangent(const TangentImageSet& set, int out_height,
                           const FromTangentOptions& options) {
  if (out_height < 2 || !is_power_of_two(out_height)) {
    fail(ErrorCode::kInvalidArgument,
         "output height must be a power of two >= 2, got " +
             std::to_string(out_height));
  }
  validate_tangent_set(set);

  const int b = set.provenance.base_level;
  const FaceLocator locator(Icosphere::build(b));
  std::vector<TangentFrame> frames;
  frames.reserve(set.specs.size());
  for (const auto& spec : set.specs) frames.emplace_back(spec.center);

  const Interp mode = effective_interp(set.provenance.interp, set.semantics);
  const int c = set.channels();
  EquirectImage out{Image(out_height, 2 * out_height, c), set.semantics};
  if (options.write_counts) {
    options.write_counts->assign(
        static_cast<std::size_t>(out.height()) * out.width(), 0);
  }

  parallel_for(static_cast<std::size_t>(out.height()), options.threads,
               [&](std::size_t begin, std::size_t end) {
    for (int row = static_cast<int>(begin); row < static_cast<int>(end);
         ++row) {
      for (int col = 0; col < out.width(); ++col) {
        const Eigen::Vector3d dir = to_unit_vector(out.pixel_center(row, col));
        const std::uint32_t face = locator.locate_unchecked(dir);
        const TangentPlaneSpec& spec = set.specs[face];
        const TangentFrame& frame = frames[face];
        const double bound = spec.grid_bound() * (1.0 + 1e-9);
        const double w = dir.dot(frame.normal());
        const PlanePoint p = frame.project(dir);
        if (!(w > 0.0) || std::abs(p.x) > bound || std::abs(p.y) > bound) {
          std::ostringstream msg;
          msg << "output pixel (" << row << ", " << col
              << ") projects to plane point (" << p.x << ", " << p.y
              << ") outside the grid of face " << face << " (bound " << bound
              << ")";
          fail(ErrorCode::kCoverageViolation, msg.str());
        }
        const Eigen::Vector2d px = spec.plane_to_pixel(p);
        sample(set.images[face], px.x(), px.y(), mode, ColumnBorder::kClamp,
               &out.pixels.samples[out.pixels.index(row, col)]);
        if (options.write_counts) {
          auto& count = (*options.write_counts)[static_cast<std::size_t>(row) *
                                                    out.width() +
                                                col];
          ++count;
        }
      }
    }
  });
  return out;
}

std::string face_file_name(int face_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "face_%05d.png", face_index);
  return name;
}

void save_tangent_set(const TangentImageSet& set, const std::string& dir) {
  validate_tangent_set(set);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoWrite, "cannot create directory '" + dir + "'");

  nlohmann::ordered_json meta;
  meta["base_level"] = set.provenance.base_level;
  meta["source_level"] = set.provenance.source_level;
  meta["dim"] = set.dim();
  meta["interp"] = std::string(interp_name(set.provenance.interp));
  meta["channel_semantics"] = std::string(kind_name(set.semantics.kind));
  meta["channels"] = set.channels();
  meta["source_height"] = set.provenance.source_height;
  meta["source_width"] = set.provenance.source_width;
  if (set.semantics.is_depth()) {
    meta["depth_scale"] = set.semantics.depth_scale;
    meta["invalid_value"] = set.semantics.invalid_value;
  }
  auto faces = nlohmann::ordered_json::array();
  for (const auto& spec : set.specs) {
    nlohmann::ordered_json f;
    f["center_lat_deg"] = spec.center.lat * kRadToDeg;
    f["center_lon_deg"] = spec.center.lon * kRadToDeg;
    f["half_extent"] = spec.half_extent;
    faces.push_back(std::move(f));
  }
  meta["faces"] = std::move(faces);

  for (std::size_t f = 0; f < set.images.size(); ++f) {
    write_png(set.images[f],
              (std::filesystem::path(dir) / face_file_name(static_cast<int>(f)))
                  .string(),
              set.semantics);
  }
  const auto meta_path = (std::filesystem::path(dir) / "meta.json").string();
  std::ofstream os(meta_path, std::ios::binary);
  os << meta.dump(2) << '\n';
  if (!os) fail(ErrorCode::kIoWrite, "cannot write '" + meta_path + "'");
}

TangentImageSet load_tangent_meta(const std::string& dir) {
  const auto meta_path = (std::filesystem::path(dir) / "meta.json").string();
  std::ifstream is(meta_path, std::ios::binary);
  if (!is) fail(ErrorCode::kIoRead, "cannot open '" + meta_path + "'");

  TangentImageSet set;
  try {
    const nlohmann::json meta = nlohmann::json::parse(is);
    const int b = meta.at("base_level").get<int>();
    const int s = meta.at("source_level").get<int>();
    if (b < 0 || s < b || s > 20) {
      fail(ErrorCode::kFormatMeta, meta_path + ": invalid levels");
    }
    set.provenance.base_level = b;
    set.provenance.source_level = s;
    set.provenance.interp = parse_interp(meta.at("interp").get<std::string>());
    set.provenance.source_height =
        meta.value("source_height", 1 << (s + 1));
    set.provenance.source_width = meta.value("source_width", 1 << (s + 2));
    set.semantics.kind =
        parse_kind(meta.at("channel_semantics").get<std::string>());
    set.semantics.depth_scale =
        meta.value("depth_scale", set.semantics.depth_scale);
    set.semantics.invalid_value =
        meta.value("invalid_value", set.semantics.invalid_value);

    set.specs = make_plane_specs(Icosphere::build(b), s);
    const auto& faces = meta.at("faces");
    if (meta.at("dim").get<int>() != set.specs.front().dim ||
        faces.size() != set.specs.size()) {
      fail(ErrorCode::kFormatMeta,
           meta_path + ": dim or face count disagrees with the levels");
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto& spec = set.specs[f];
      const double lat = faces[f].at("center_lat_deg").get<double>();
      const double lon = faces[f].at("center_lon_deg").get<double>();
      const double h = faces[f].at("half_extent").get<double>();
      if (std::abs(lat - spec.center.lat * kRadToDeg) > 1e-6 ||
          std::abs(lon - spec.center.lon * kRadToDeg) > 1e-6 ||
          std::abs(h - spec.half_extent) > 1e-9) {
        fail(ErrorCode::kFormatMeta,
             meta_path + ": face " + std::to_string(f) +
                 " geometry does not match the base level");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatMeta, meta_path + ": " + e.what());
  }
  return set;
}

TangentImageSet load_tangent_set(const std::string& dir) {
  TangentImageSet set = load_tangent_meta(dir);
  set.images.reserve(set.specs.size());
  for (std::size_t f = 0; f < set.specs.size(); ++f) {
    const auto path =
        (std::filesystem::path(dir) / face_file_name(static_cast<int>(f)))
            .string();
    if (!std::filesystem::exists(path)) {
      fail(ErrorCode::kFormatMeta, "missing face file '" + path + "'");
    }
    set.images.push_back(read_png(path, set.semantics));
  }
  validate_tangent_set(set);
  return set;
}

}  // namespace tangent
