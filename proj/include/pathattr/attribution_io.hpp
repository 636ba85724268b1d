#pragma once

#include <string>

#include "pathattr/integrators.hpp"

namespace pathattr {

/// Writes <base_path>.bin (row-major float64, little endian, no header) and
/// <base_path>.json (shape plus the AttributionMap metadata).
void save_attribution(const AttributionMap& a, const std::string& base_path);

/// Reads the pair written by save_attribution; the sidecar carries the shape,
/// and the binary length must match it exactly.
AttributionMap load_attribution(const std::string& base_path);

/// Grayscale visualization: per-pixel |channel sum|, min-max normalized to
/// [0,1]. A constant map renders as mid-gray 0.5.
ImageTensor render_heatmap(const ImageTensor& attributions);

}  // namespace pathattr
