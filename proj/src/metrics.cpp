#include "pathattr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"

namespace pathattr {

namespace {

// Pixel order for the reveal games: descending importance, index breaks ties.
std::vector<std::size_t> reveal_order(const ImageTensor& importance) {
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (importance.data[a] != importance.data[b])
            return importance.data[a] > importance.data[b];
        return a < b;
    });
    return order;
}

void check_importance_for(const ImageTensor& x, const ImageTensor& importance) {
    validate(importance, "importance map");
    if (importance.channels != 1)
        throw invalid_parameter_error("importance map must have 1 channel");
    if (importance.height != x.height || importance.width != x.width)
        throw invalid_parameter_error("importance map size differs from the image");
}

// Copies all channels of pixel `pix` from src into dst.
inline void reveal_pixel(ImageTensor& dst, const ImageTensor& src, std::size_t pix) {
    const std::size_t base = pix * src.channels;
    for (int c = 0; c < src.channels; ++c) dst.data[base + c] = src.data[base + c];
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fills empty bins by linear interpolation between filled neighbors; the ends
// extend the nearest filled bin. `filled` marks bins with data.
void fill_empty_bins(std::vector<double>& values, const std::vector<bool>& filled) {
    const int n = static_cast<int>(values.size());
    int first = -1, last = -1;
    for (int i = 0; i < n; ++i)
        if (filled[i]) {
            if (first < 0) first = i;
            last = i;
        }
    if (first < 0) throw invalid_parameter_error("no data in any information bin");
    for (int i = 0; i < first; ++i) values[i] = values[first];
    for (int i = last + 1; i < n; ++i) values[i] = values[last];
    int prev = first;
    for (int i = first + 1; i <= last; ++i) {
        if (!filled[i]) continue;
        for (int j = prev + 1; j < i; ++j) {
            const double t = static_cast<double>(j - prev) / (i - prev);
            values[j] = values[prev] + t * (values[i] - values[prev]);
        }
        prev = i;
    }
}

struct SsimMeans {
    double luminance_cs = 0.0;  // mean of l*cs (plain SSIM)
    double cs = 0.0;            // mean of the contrast-structure term
};

SsimMeans ssim_level(const ImageTensor& a, const ImageTensor& b) {
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    constexpr double kSigma = 1.5;
    constexpr int kRadius = 5;  // 11x11 window

    ImageTensor aa = zeros_like(a), bb = zeros_like(a), ab = zeros_like(a);
    kernels::mul(a.data.data(), a.data.data(), aa.data.data(), a.size());
    kernels::mul(b.data.data(), b.data.data(), bb.data.data(), a.size());
    kernels::mul(a.data.data(), b.data.data(), ab.data.data(), a.size());

    const ImageTensor mu_a = blur(a, kSigma, kRadius);
    const ImageTensor mu_b = blur(b, kSigma, kRadius);
    const ImageTensor e_aa = blur(aa, kSigma, kRadius);
    const ImageTensor e_bb = blur(bb, kSigma, kRadius);
    const ImageTensor e_ab = blur(ab, kSigma, kRadius);

    double sum_ssim = 0.0, sum_cs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ma = mu_a.data[i], mb = mu_b.data[i];
        const double va = e_aa.data[i] - ma * ma;
        const double vb = e_bb.data[i] - mb * mb;
        const double cov = e_ab.data[i] - ma * mb;
        const double l = (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
        sum_ssim += l * cs;
        sum_cs += cs;
    }
    SsimMeans out;
    out.luminance_cs = sum_ssim / static_cast<double>(a.size());
    out.cs = sum_cs / static_cast<double>(a.size());
    return out;
}

ImageTensor downsample2(const ImageTensor& x) {
    const int h = x.height / 2, w = x.width / 2;
    ImageTensor out(h, w, x.channels);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int c = 0; c < x.channels; ++c)
                out.at(y, xx, c) = 0.25 * (x.at(2 * y, 2 * xx, c) +
                                           x.at(2 * y, 2 * xx + 1, c) +
                                           x.at(2 * y + 1, 2 * xx, c) +
                                           x.at(2 * y + 1, 2 * xx + 1, c));
    return out;
}

}  // namespace

ImageTensor pixel_importance(const ImageTensor& attributions) {
    validate(attributions, "attribution tensor");
    ImageTensor out(attributions.height, attributions.width, 1);
    for (int y = 0; y < attributions.height; ++y)
        for (int x = 0; x < attributions.width; ++x) {
            double s = 0.0;
            for (int c = 0; c < attributions.channels; ++c) s += attributions.at(y, x, c);
            out.at(y, x, 0) = std::abs(s);
        }
    return out;
}

double trapezoid_auc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw invalid_parameter_error("trapezoid_auc: x and y lengths differ");
    if (x.size() < 2) throw invalid_parameter_error("trapezoid_auc: need >= 2 points");
    double area = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i] < x[i - 1])
            throw invalid_parameter_error("trapezoid_auc: x must be non-decreasing");
        area += (x[i] - x[i - 1]) * 0.5 * (y[i] + y[i - 1]);
    }
    return area;
}

InsertionCurves insertion_curve(const Model& m, const ImageTensor& x, int target_class,
                                const ImageTensor& importance, double step_fraction,
                                const ImageTensor* base) {
    validate(x, "insertion image");
    check_importance_for(x, importance);
    if (!(step_fraction > 0.0 && step_fraction <= 1.0))
        throw invalid_parameter_error("insertion step fraction must be in (0, 1]");

    if (base) {
        validate(*base, "insertion base");
        if (!base->same_shape(x))
            throw invalid_parameter_error("insertion base shape differs from the image");
    }
    ImageTensor composite = base ? *base : zeros_like(x);

    const double p_orig = m.probabilities(x)[static_cast<std::size_t>(target_class)];
    if (p_orig <= 0.0)
        throw degenerate_input_error(
            "insertion ratio undefined: original class probability is zero");

    const std::vector<std::size_t> order = reveal_order(importance);
    const std::size_t pixels = order.size();

    InsertionCurves out;
    const int n_partial = static_cast<int>(std::ceil(1.0 / step_fraction - 1e-12));
    for (int i = 0; i < n_partial; ++i) {
        const double t = i * step_fraction;
        if (t >= 1.0) break;
        out.fractions.push_back(t);
    }
    out.fractions.push_back(1.0);

    std::size_t revealed = 0;
    for (double t : out.fractions) {
        const std::size_t k = static_cast<std::size_t>(
            std::lround(t * static_cast<double>(pixels)));
        for (; revealed < k; ++revealed) reveal_pixel(composite, x, order[revealed]);
        const double p =
            m.probabilities(composite)[static_cast<std::size_t>(target_class)];
        out.probability.push_back(p);
        out.ratio.push_back(p / p_orig);
    }

    out.auc_probability = trapezoid_auc(out.fractions, out.probability);
    out.auc_ratio = trapezoid_auc(out.fractions, out.ratio);
    return out;
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
    validate(a, "ssim input a");
    validate(b, "ssim input b");
    if (!a.same_shape(b)) throw invalid_parameter_error("ssim inputs differ in shape");
    return ssim_level(a, b).luminance_cs;
}

double msssim(const ImageTensor& a, const ImageTensor& b, int levels, bool auto_reduce) {
    validate(a, "msssim input a");
    validate(b, "msssim input b");
    if (!a.same_shape(b)) throw invalid_parameter_error("msssim inputs differ in shape");
    if (levels < 1 || levels > 5)
        throw invalid_parameter_error("msssim levels must be in [1, 5]");

    const int min_dim = std::min(a.height, a.width);
    int use_levels = levels;
    while (use_levels > 1 && min_dim < 11 * (1 << (use_levels - 1))) {
        if (!auto_reduce)
            throw invalid_parameter_error("image too small for requested msssim levels");
        --use_levels;
    }
    if (min_dim < 11)
        throw invalid_parameter_error("image too small for msssim (needs >= 11 px)");

    static constexpr double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double wsum = 0.0;
    for (int i = 0; i < use_levels; ++i) wsum += kWeights[i];

    ImageTensor ca = a, cb = b;
    double result = 1.0;
    for (int level = 0; level < use_levels; ++level) {
        const SsimMeans means = ssim_level(ca, cb);
        const double w = kWeights[level] / wsum;
        const double term =
            level == use_levels - 1 ? means.luminance_cs : means.cs;
        result *= std::pow(std::max(term, 0.0), w);
        if (level + 1 < use_levels) {
            ca = downsample2(ca);
            cb = downsample2(cb);
        }
    }
    return result;
}

double normalized_entropy(const ImageTensor& a, const ImageTensor& reference) {
    validate(a, "normalized_entropy input");
    validate(reference, "normalized_entropy reference");
    if (!a.same_shape(reference))
        throw invalid_parameter_error("normalized_entropy inputs differ in shape");
    const double num = static_cast<double>(compressed_size(a));
    const double den = static_cast<double>(compressed_size(reference));
    return std::clamp(num / den, 0.0, 1.0);
}

AicSicResult aic_sic(const Model& m, std::span<const ImageTensor> images,
                     std::span<const ImageTensor> importances,
                     const AicSicOptions& opts) {
    if (images.size() != importances.size())
        throw invalid_parameter_error("aic_sic: images and importances differ in count");
    if (images.empty()) throw invalid_parameter_error("aic_sic: no images");
    if (opts.thresholds < 2)
        throw invalid_parameter_error("aic_sic: need at least 2 thresholds");
    if (opts.bins < 1) throw invalid_parameter_error("aic_sic: bins must be >= 1");
    if (!(opts.blur_sigma > 0.0) || opts.blur_radius < 1)
        throw invalid_parameter_error("aic_sic: invalid blur parameters");
    const bool use_entropy = opts.info_measure == "entropy";
    if (!use_entropy && opts.info_measure != "msssim")
        throw invalid_parameter_error("aic_sic: unknown info measure " +
                                      opts.info_measure);

    const int bins = opts.bins;
    std::vector<double> acc_sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::size_t> acc_count(static_cast<std::size_t>(bins), 0);
    std::vector<std::vector<double>> ratio_samples(static_cast<std::size_t>(bins));

    for (std::size_t img = 0; img < images.size(); ++img) {
        const ImageTensor& x = images[img];
        validate(x, "aic_sic image");
        check_importance_for(x, importances[img]);

        const std::vector<double> p0 = m.probabilities(x);
        const int pred =
            static_cast<int>(std::max_element(p0.begin(), p0.end()) - p0.begin());
        const double p_orig = p0[static_cast<std::size_t>(pred)];
        if (p_orig <= 0.0)
            throw degenerate_input_error(
                "aic_sic: original class probability is zero");

        ImageTensor composite = blur(x, opts.blur_sigma, opts.blur_radius);
        const std::vector<std::size_t> order = reveal_order(importances[img]);
        const std::size_t pixels = order.size();

        std::size_t revealed = 0;
        for (int ti = 0; ti < opts.thresholds; ++ti) {
            const double t = static_cast<double>(ti) / (opts.thresholds - 1);
            const std::size_t k = static_cast<std::size_t>(
                std::lround(t * static_cast<double>(pixels)));
            for (; revealed < k; ++revealed) reveal_pixel(composite, x, order[revealed]);

            const double info = use_entropy ? normalized_entropy(composite, x)
                                            : msssim(composite, x);
            const std::vector<double> p = m.probabilities(composite);
            const int pred_c =
                static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            const double ratio =
                std::clamp(p[static_cast<std::size_t>(pred)] / p_orig, 0.0, 1.0);

            const int bin = std::min(bins - 1,
                                     static_cast<int>(std::floor(info * bins)));
            acc_sum[bin] += pred_c == pred ? 1.0 : 0.0;
            acc_count[bin] += 1;
            ratio_samples[bin].push_back(ratio);
        }
    }

    AicSicResult out;
    out.bin_centers.resize(static_cast<std::size_t>(bins));
    out.accuracy.assign(static_cast<std::size_t>(bins), 0.0);
    out.prob_ratio.assign(static_cast<std::size_t>(bins), 0.0);
    out.bin_counts = acc_count;
    std::vector<bool> filled(static_cast<std::size_t>(bins), false);
    for (int b = 0; b < bins; ++b) {
        out.bin_centers[b] = (b + 0.5) / bins;
        if (acc_count[b] > 0) {
            filled[b] = true;
            out.accuracy[b] = acc_sum[b] / static_cast<double>(acc_count[b]);
            out.prob_ratio[b] = median_of(ratio_samples[b]);
        }
    }
    fill_empty_bins(out.accuracy, filled);
    fill_empty_bins(out.prob_ratio, filled);

    out.aic = kernels::sum(out.accuracy.data(), out.accuracy.size()) / bins;
    out.sic = kernels::sum(out.prob_ratio.data(), out.prob_ratio.size()) / bins;
    return out;
}

LocalizationResult localization(const ImageTensor& importance, const ImageTensor& mask) {
    validate(importance, "localization importance");
    validate(mask, "localization mask");
    if (importance.channels != 1 || mask.channels != 1)
        throw invalid_parameter_error("localization inputs must have 1 channel");
    if (importance.height != mask.height || importance.width != mask.width)
        throw invalid_parameter_error("localization inputs differ in size");

    const std::size_t n = mask.size();
    std::size_t positives = 0;
    for (double v : mask.data) {
        if (v != 0.0 && v != 1.0)
            throw invalid_parameter_error("localization mask must be binary");
        if (v == 1.0) ++positives;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw invalid_parameter_error("localization mask must contain both classes");

    std::vector<double> norm(importance.data);
    const auto [lo_it, hi_it] = std::minmax_element(norm.begin(), norm.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        std::fill(norm.begin(), norm.end(), 0.5);
    } else {
        const double inv = 1.0 / (hi - lo);
        for (double& v : norm) v = (v - lo) * inv;
    }

    LocalizationResult out;
    double best_f1 = -1.0;
    double best_threshold = 0.0;
    double best_mae = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double t = static_cast<double>(i) / 255.0;
        std::size_t tp = 0, fp = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (norm[j] >= t) {
                if (mask.data[j] == 1.0)
                    ++tp;
                else
                    ++fp;
            }
        }
        const std::size_t fn = positives - tp;
        const double f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = t;
            best_mae = static_cast<double>(fp + fn) / static_cast<double>(n);
        }
    }
    out.best_f1 = best_f1;
    out.best_threshold = best_threshold;
    out.mae = best_mae;

    // Rank-based AUC, average ranks over ties.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return norm[a] < norm[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && norm[idx[j + 1]] == norm[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t kk = i; kk <= j; ++kk)
            if (mask.data[idx[kk]] == 1.0) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    out.roc_auc =
        (rank_sum_pos - 0.5 * static_cast<double>(positives) * (positives + 1)) /
        (static_cast<double>(positives) * static_cast<double>(negatives));
    return out;
}

}  // namespace pathattr
