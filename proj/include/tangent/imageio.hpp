#pragma once

#include <cstdint>
#include <string>

#include "tangent/image.hpp"

namespace tangent {

// Integer <-> float rules:
//   color:  float = v / maxint, stored = floor(x * maxint + 0.5)
//   label:  identity, integer values 0..255 only
//   depth:  float = v * depth_scale, invalid_value <-> NaN
float dequantize(std::uint32_t stored, const ChannelSemantics& semantics);
// Throws kRange for values that do not fit the encoding.
std::uint32_t quantize(float value, const ChannelSemantics& semantics);

// PNG with 1-4 channels at the bit depth implied by `semantics`.
// Errors: kIoRead (missing / not a PNG), kFormatBitDepth.
Image read_png(const std::string& path, const ChannelSemantics& semantics);
// Errors: kRange, kIoWrite.
void write_png(const Image& image, const std::string& path,
               const ChannelSemantics& semantics);

// read_png plus the 2:1 aspect check (kFormatAspect).
EquirectImage load_equirect(const std::string& path,
                            const ChannelSemantics& semantics);
void save_equirect(const EquirectImage& image, const std::string& path);

}  // namespace tangent
