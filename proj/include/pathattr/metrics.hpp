#pragma once

#include <span>
#include <string>
#include <vector>

#include "pathattr/models.hpp"
#include "pathattr/tensor.hpp"

namespace pathattr {

/// Per-pixel importance of an attribution tensor: |sum over channels|,
/// returned as an H x W x 1 tensor.
ImageTensor pixel_importance(const ImageTensor& attributions);

/// Trapezoid rule over sample points (x must be non-decreasing). Not
/// normalized; callers pass x already scaled to the unit interval.
double trapezoid_auc(const std::vector<double>& x, const std::vector<double>& y);

/// Insertion game: reveal the top-k pixels of x (by importance) over a base
/// image and track the model's softmax probability of target_class. Fractions
/// run 0, step, 2*step, ..., 1 inclusive; k = lround(fraction * pixels).
struct InsertionCurves {
    std::vector<double> fractions;
    std::vector<double> probability;  // p_c of each composite
    std::vector<double> ratio;        // probability / p_c of the original
    double auc_probability = 0.0;
    double auc_ratio = 0.0;
};

InsertionCurves insertion_curve(const Model& m, const ImageTensor& x, int target_class,
                                const ImageTensor& importance,
                                double step_fraction = 0.05,
                                const ImageTensor* base = nullptr);  // null = black

/// Mean SSIM with the standard 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2 on a unit dynamic range. Multi-channel inputs average the
/// per-channel means.
double ssim(const ImageTensor& a, const ImageTensor& b);

/// Multi-scale SSIM, 2x2 average-pool between scales, standard five weights
/// renormalized when fewer levels are used. With auto_reduce the level count
/// drops until the coarsest scale still fits the 11x11 window; otherwise a
/// too-small image is an error. Per-level means are clamped at 0 before the
/// weighted geometric mean.
double msssim(const ImageTensor& a, const ImageTensor& b, int levels = 5,
              bool auto_reduce = true);

/// Information level of `a` relative to `reference`: ratio of DEFLATE
/// compressed sizes of the 8-bit quantizations, clipped to [0,1].
double normalized_entropy(const ImageTensor& a, const ImageTensor& reference);

/// Accuracy / Softmax Information Curves over bokeh composites. Each image is
/// paired per threshold with a composite keeping its top-k pixels sharp over a
/// Gaussian-blurred base; composites land on the information axis (normalized
/// entropy or MS-SSIM against the original), are grouped into equal-width
/// bins, and the per-bin accuracy (mean) and clamped probability ratio
/// (median) form the two curves. Empty interior bins are linearly
/// interpolated, ends extend the nearest filled bin. AIC and SIC are the
/// curve means, which equal the areas because the bins partition [0,1].
/// Accuracy and ratio are measured against the class the model predicts on
/// each original image.
struct AicSicOptions {
    std::string info_measure = "entropy";  // "entropy" | "msssim"
    int thresholds = 25;                   // reveal fractions 0..1 inclusive
    int bins = 100;
    double blur_sigma = 20.0 / 3.0;
    int blur_radius = 20;
};

struct AicSicResult {
    std::vector<double> bin_centers;
    std::vector<double> accuracy;
    std::vector<double> prob_ratio;
    std::vector<std::size_t> bin_counts;  // composites landing in each bin
    double aic = 0.0;
    double sic = 0.0;
};

AicSicResult aic_sic(const Model& m, std::span<const ImageTensor> images,
                     std::span<const ImageTensor> importances,
                     const AicSicOptions& opts = {});

/// Weakly supervised localization of a binary mask from an importance map.
/// The map is min-max normalized (a constant map becomes all 0.5), F1 is
/// scanned over 256 thresholds i/255 with prediction = normalized >= t, and
/// MAE is the binarized error at the best threshold (smallest threshold wins
/// ties). ROC-AUC is rank-based with average ranks for ties.
struct LocalizationResult {
    double best_f1 = 0.0;
    double best_threshold = 0.0;
    double mae = 0.0;
    double roc_auc = 0.0;
};

LocalizationResult localization(const ImageTensor& importance, const ImageTensor& mask);

}  // namespace pathattr
