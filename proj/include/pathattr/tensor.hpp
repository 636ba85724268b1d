#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pathattr {

/// Dense H×W×C image tensor, row-major with channel-last layout.
/// Pixel values are nominally in [0,1]; attribution code reuses the same
/// container for arbitrary real-valued per-feature data.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, double fill = 0.0);

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const ImageTensor& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
};

ImageTensor zeros_like(const ImageTensor& x);
ImageTensor constant_like(const ImageTensor& x, double value);

/// Throws invalid_parameter_error if the tensor has an inconsistent length
/// or non-finite values.
void validate(const ImageTensor& x, const char* what = "tensor");

/// 2D Gaussian kernel, (2*radius+1)^2 weights normalized to sum 1.
/// Built as the outer product of a normalized 1D profile, so it is exactly
/// symmetric under transpose and 90-degree rotation.
struct GaussianKernel {
    int radius = 0;
    double sigma = 0.0;
    std::vector<double> weights;  // (2r+1) x (2r+1), row-major
    std::vector<double> profile;  // normalized 1D slice of length 2r+1

    double at(int dy, int dx) const {
        const int n = 2 * radius + 1;
        return weights[static_cast<std::size_t>(dy + radius) * n + (dx + radius)];
    }
};

GaussianKernel make_gaussian_kernel(double sigma, int radius);

int default_blur_radius(double sigma);

/// Gaussian blur with reflect padding (mirror without edge repeat).
/// sigma == 0 returns the input unchanged. The two-argument form uses
/// radius = max(1, ceil(3*sigma)).
ImageTensor blur(const ImageTensor& x, double sigma);
ImageTensor blur(const ImageTensor& x, double sigma, int radius);

/// Byte length of the DEFLATE-compressed 8-bit quantization of x.
/// Deterministic for identical inputs; used as the compressibility probe
/// behind the normalized-entropy information level.
std::size_t compressed_size(const ImageTensor& x);

/// Quantized 8-bit view of x (values clamped to [0,1], rounded to 0..255).
std::vector<std::uint8_t> quantize_u8(const ImageTensor& x);

}  // namespace pathattr
