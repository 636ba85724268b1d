#pragma once

#include <vector>

#include "pathattr/models.hpp"
#include "pathattr/tensor.hpp"

namespace pathattr {

/// Straight-line path baseline -> x with `steps` segments, so steps+1 points
/// inclusive of both endpoints. Endpoints are exact copies, interior points
/// are baseline + (j/steps) * (x - baseline).
std::vector<ImageTensor> straight_path(const ImageTensor& baseline, const ImageTensor& x,
                                       int steps);

/// Guided path baseline -> x. Each step moves a budget of L1 mass toward x,
/// spending it on the coordinates with the smallest |gradient| first (greedy
/// approximation of the minimal-|gradient| path search). `fraction` is the
/// share of the remaining L1 distance moved per step; 0 selects the default
/// 1/(steps - j), which moves equal mass per step. The final step always
/// completes the path, so the last point equals x exactly.
std::vector<ImageTensor> guided_path(const Model& m, int target_class,
                                     const ImageTensor& baseline, const ImageTensor& x,
                                     int steps, double fraction = 0.0);

/// Blur-path sigma schedule: sigma_j = max_sigma * sqrt(1 - j/steps). The
/// square root comes from uniform stepping in variance, where the blur-path
/// integral is defined; the last entry is exactly 0.
struct BlurSchedule {
    std::vector<double> sigmas;  // length steps + 1, strictly decreasing to 0
};

BlurSchedule make_blur_schedule(double max_sigma, int steps);

/// Path point j is x blurred with schedule.sigmas[j]; the last point is x
/// itself. The most-blurred first point plays the role of the baseline.
std::vector<ImageTensor> blur_path(const ImageTensor& x, const BlurSchedule& schedule);

}  // namespace pathattr
