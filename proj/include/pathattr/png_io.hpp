#pragma once

#include <string>

#include "pathattr/tensor.hpp"

namespace pathattr {

/// Reads an 8-bit grayscale or RGB PNG into [0,1] values. Alpha channels are
/// dropped; palette images are expanded to RGB. Other bit depths are rejected.
ImageTensor read_png(const std::string& path);

/// Writes a 1-channel (grayscale) or 3-channel (RGB) tensor as an 8-bit PNG.
/// Values are clamped to [0,1] and quantized; write/read round-trips are
/// exact after the first quantization.
void write_png(const ImageTensor& x, const std::string& path);

}  // namespace pathattr
