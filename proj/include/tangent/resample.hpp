#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tangent/gnomonic.hpp"
#include "tangent/image.hpp"
#include "tangent/sampling.hpp"

namespace tangent {

struct TangentProvenance {
  int source_height = 0;
  int source_width = 0;
  int base_level = 0;
  int source_level = 0;
  Interp interp = Interp::kBilinear;
};

// N = 20 * 4^b tangent images of d x d x C, aligned with `specs`.
struct TangentImageSet {
  std::vector<TangentPlaneSpec> specs;
  std::vector<Image> images;
  ChannelSemantics semantics;
  TangentProvenance provenance;

  int dim() const { return specs.empty() ? 0 : specs.front().dim; }
  int channels() const { return images.empty() ? 0 : images.front().channels; }
};

// Label images always resample with nearest, whatever `interp` says.
Interp effective_interp(Interp requested, const ChannelSemantics& semantics);

/*
  Renders an equirectangular image onto the tangent planes of a level-b
  icosphere. Longitude wraps and latitude clamps at the image border.
  Errors: kFormatAspect / kFormatDimensions for bad input shapes,
  kInvalidArgument when b exceeds the input level.
*/
TangentImageSet to_tangent(const EquirectImage& image, int base_level,
                           Interp interp, int threads = 0);

struct FromTangentOptions {
  int threads = 0;
  // When set, receives out_height * 2 * out_height write counts.
  std::vector<std::uint8_t>* write_counts = nullptr;
};

/*
  Renders a tangent image set back to an equirectangular image of the given
  height. Each output pixel is taken from the single tangent image whose base
  face owns the pixel direction, using the set's interpolation mode.
  Errors: kInvalidArgument (height not a power of two), kFormatMeta (set is
  inconsistent), kCoverageViolation (owner grid does not contain the sample).
*/
EquirectImage from_tangent(const TangentImageSet& set, int out_height,
                           const FromTangentOptions& options = {});

// Throws kFormatMeta describing the first inconsistency found.
void validate_tangent_set(const TangentImageSet& set);

// On-disk layout: <dir>/face_00000.png ... plus <dir>/meta.json.
void save_tangent_set(const TangentImageSet& set, const std::string& dir);
TangentImageSet load_tangent_set(const std::string& dir);
// Reads only meta.json; images are left empty.
TangentImageSet load_tangent_meta(const std::string& dir);

std::string face_file_name(int face_index);

}  // namespace tangent
