#include "pathattr/tensor.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"

namespace pathattr {

ImageTensor::ImageTensor(int h, int w, int c, double fill)
    : height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || c <= 0)
        throw invalid_parameter_error("ImageTensor: dimensions must be positive");
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

ImageTensor zeros_like(const ImageTensor& x) {
    return ImageTensor(x.height, x.width, x.channels, 0.0);
}

ImageTensor constant_like(const ImageTensor& x, double value) {
    return ImageTensor(x.height, x.width, x.channels, value);
}

void validate(const ImageTensor& x, const char* what) {
    const std::size_t expected =
        static_cast<std::size_t>(x.height) * x.width * x.channels;
    if (x.height <= 0 || x.width <= 0 || x.channels <= 0 || x.data.size() != expected)
        throw invalid_parameter_error(std::string(what) + ": inconsistent shape");
    for (double v : x.data)
        if (!std::isfinite(v))
            throw invalid_parameter_error(std::string(what) + ": non-finite value");
}

GaussianKernel make_gaussian_kernel(double sigma, int radius) {
    if (!(sigma > 0.0)) throw invalid_parameter_error("make_gaussian_kernel: sigma must be > 0");
    if (radius < 1) throw invalid_parameter_error("make_gaussian_kernel: radius must be >= 1");

    const int n = 2 * radius + 1;
    std::vector<double> profile(n);
    for (int k = -radius; k <= radius; ++k)
        profile[k + radius] = std::exp(-0.5 * (static_cast<double>(k) * k) / (sigma * sigma));

    // Kahan-summed normalizer keeps the profile sum at 1 to within a few ulp.
    double s = 0.0, comp = 0.0;
    for (double w : profile) {
        double y = w - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    for (double& w : profile) w /= s;

    GaussianKernel kernel;
    kernel.radius = radius;
    kernel.sigma = sigma;
    kernel.profile = profile;
    kernel.weights.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            kernel.weights[static_cast<std::size_t>(i) * n + j] = profile[i] * profile[j];
    return kernel;
}

int default_blur_radius(double sigma) {
    return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

namespace {

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

// One separable pass along a line of `len` samples with stride `stride`.
void convolve_line(const double* src, std::size_t stride, int len,
                   const std::vector<double>& profile, int radius,
                   std::vector<double>& padded, double* dst, std::size_t dst_stride) {
    padded.resize(static_cast<std::size_t>(len) + 2 * radius);
    for (int k = 0; k < len + 2 * radius; ++k)
        padded[k] = src[static_cast<std::size_t>(reflect_index(k - radius, len)) * stride];
    const std::size_t taps = profile.size();
    for (int i = 0; i < len; ++i)
        dst[static_cast<std::size_t>(i) * dst_stride] =
            kernels::dot(profile.data(), padded.data() + i, taps);
}

}  // namespace

ImageTensor blur(const ImageTensor& x, double sigma) {
    if (sigma == 0.0) return x;
    return blur(x, sigma, default_blur_radius(sigma));
}

ImageTensor blur(const ImageTensor& x, double sigma, int radius) {
    validate(x, "blur input");
    if (sigma < 0.0) throw invalid_parameter_error("blur: sigma must be >= 0");
    if (sigma == 0.0) return x;

    const GaussianKernel kernel = make_gaussian_kernel(sigma, radius);
    const int h = x.height, w = x.width, c = x.channels;
    ImageTensor tmp(h, w, c);
    ImageTensor out(h, w, c);
    std::vector<double> padded;

    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            const double* src = &x.data[(static_cast<std::size_t>(y) * w) * c + ch];
            double* dst = &tmp.data[(static_cast<std::size_t>(y) * w) * c + ch];
            convolve_line(src, c, w, kernel.profile, radius, padded, dst, c);
        }
        for (int col = 0; col < w; ++col) {
            const double* src = &tmp.data[static_cast<std::size_t>(col) * c + ch];
            double* dst = &out.data[static_cast<std::size_t>(col) * c + ch];
            convolve_line(src, static_cast<std::size_t>(w) * c, h, kernel.profile, radius,
                          padded, dst, static_cast<std::size_t>(w) * c);
        }
    }
    return out;
}

std::vector<std::uint8_t> quantize_u8(const ImageTensor& x) {
    std::vector<std::uint8_t> bytes(x.data.size());
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double v = std::clamp(x.data[i], 0.0, 1.0);
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return bytes;
}

std::size_t compressed_size(const ImageTensor& x) {
    validate(x, "compressed_size input");
    const std::vector<std::uint8_t> raw = quantize_u8(x);
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> buffer(bound);
    int rc = compress2(buffer.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                       Z_BEST_COMPRESSION);
    if (rc != Z_OK) throw io_error("compressed_size: deflate failed");
    return static_cast<std::size_t>(bound);
}

}  // namespace pathattr
