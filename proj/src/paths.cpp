#include "pathattr/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"

namespace pathattr {

namespace {

void check_pair(const ImageTensor& baseline, const ImageTensor& x, int steps) {
    validate(baseline, "path baseline");
    validate(x, "path input");
    if (!baseline.same_shape(x))
        throw invalid_parameter_error("path endpoints must have the same shape");
    if (steps < 1) throw invalid_parameter_error("path steps must be >= 1");
}

}  // namespace

std::vector<ImageTensor> straight_path(const ImageTensor& baseline, const ImageTensor& x,
                                       int steps) {
    check_pair(baseline, x, steps);
    std::vector<ImageTensor> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    path.push_back(baseline);
    for (int j = 1; j < steps; ++j) {
        ImageTensor p = zeros_like(x);
        const double t = static_cast<double>(j) / steps;
        kernels::lerp(baseline.data.data(), x.data.data(), t, p.data.data(), p.size());
        path.push_back(std::move(p));
    }
    path.push_back(x);
    return path;
}

std::vector<ImageTensor> guided_path(const Model& m, int target_class,
                                     const ImageTensor& baseline, const ImageTensor& x,
                                     int steps, double fraction) {
    check_pair(baseline, x, steps);
    if (fraction < 0.0 || fraction > 1.0)
        throw invalid_parameter_error("guided_path fraction must be in [0, 1]");

    std::vector<ImageTensor> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    path.push_back(baseline);

    ImageTensor cur = baseline;
    std::vector<std::size_t> order(cur.size());
    for (int j = 0; j < steps; ++j) {
        if (j == steps - 1) {
            path.push_back(x);
            break;
        }
        const double remaining = kernels::l1_diff(cur.data.data(), x.data.data(), cur.size());
        if (remaining == 0.0) {
            path.push_back(cur);
            continue;
        }
        const double step_fraction = fraction > 0.0 ? fraction : 1.0 / (steps - j);
        double budget = step_fraction * remaining;

        const ImageTensor g = m.gradient(cur, target_class);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ga = std::abs(g.data[a]);
            const double gb = std::abs(g.data[b]);
            if (ga != gb) return ga < gb;
            return a < b;
        });

        for (std::size_t idx : order) {
            if (budget <= 0.0) break;
            const double gap = x.data[idx] - cur.data[idx];
            const double dist = std::abs(gap);
            if (dist == 0.0) continue;
            if (dist <= budget) {
                cur.data[idx] = x.data[idx];
                budget -= dist;
            } else {
                cur.data[idx] += (gap > 0.0 ? budget : -budget);
                budget = 0.0;
            }
        }
        path.push_back(cur);
    }
    return path;
}

BlurSchedule make_blur_schedule(double max_sigma, int steps) {
    if (!(max_sigma > 0.0))
        throw invalid_parameter_error("blur schedule max_sigma must be > 0");
    if (steps < 1) throw invalid_parameter_error("blur schedule steps must be >= 1");
    BlurSchedule s;
    s.sigmas.resize(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j)
        s.sigmas[j] = max_sigma * std::sqrt(1.0 - static_cast<double>(j) / steps);
    s.sigmas[steps] = 0.0;
    return s;
}

std::vector<ImageTensor> blur_path(const ImageTensor& x, const BlurSchedule& schedule) {
    validate(x, "blur path input");
    if (schedule.sigmas.size() < 2)
        throw invalid_parameter_error("blur schedule needs at least 2 sigmas");
    for (std::size_t i = 0; i + 1 < schedule.sigmas.size(); ++i)
        if (!(schedule.sigmas[i] > schedule.sigmas[i + 1]))
            throw invalid_parameter_error("blur schedule sigmas must strictly decrease");
    if (schedule.sigmas.back() != 0.0)
        throw invalid_parameter_error("blur schedule must end at sigma = 0");

    std::vector<ImageTensor> path;
    path.reserve(schedule.sigmas.size());
    for (double sigma : schedule.sigmas) path.push_back(blur(x, sigma));
    return path;
}

}  // namespace pathattr
