#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pathattr/errors.hpp"
#include "pathattr/tensor.hpp"
#include "testutil.hpp"

using namespace pathattr;

TEST_CASE("tensor layout is row-major channel-last") {
    ImageTensor x(2, 3, 2);
    x.at(1, 2, 1) = 42.0;
    CHECK(x.data[(1 * 3 + 2) * 2 + 1] == 42.0);
    CHECK(x.size() == 12);
    ImageTensor f(2, 2, 1, 0.25);
    CHECK(f.data[3] == 0.25);
}

TEST_CASE("tensor construction rejects bad dimensions") {
    CHECK_THROWS_AS(ImageTensor(0, 3, 1), invalid_parameter_error);
    CHECK_THROWS_AS(ImageTensor(3, -1, 1), invalid_parameter_error);
    CHECK_THROWS_AS(ImageTensor(3, 3, 0), invalid_parameter_error);
}

TEST_CASE("validate rejects non-finite values and length mismatch") {
    ImageTensor x(2, 2, 1);
    CHECK_NOTHROW(validate(x, "x"));
    x.data[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(x, "x"), invalid_parameter_error);
    x.data[2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(x, "x"), invalid_parameter_error);
    x.data[2] = 0.0;
    x.data.pop_back();
    CHECK_THROWS_AS(validate(x, "x"), invalid_parameter_error);
}

TEST_CASE("zeros_like and constant_like copy the shape") {
    ImageTensor x(3, 4, 2, 1.5);
    ImageTensor z = zeros_like(x);
    ImageTensor c = constant_like(x, -2.0);
    CHECK(z.same_shape(x));
    CHECK(c.same_shape(x));
    for (double v : z.data) CHECK(v == 0.0);
    for (double v : c.data) CHECK(v == -2.0);
}

TEST_CASE("gaussian kernel matches frozen sigma=1 values") {
    const GaussianKernel k = make_gaussian_kernel(1.0, 1);
    // exp(-1/2)/(1 + 2 exp(-1/2)) and 1/(1 + 2 exp(-1/2))
    CHECK(std::abs(k.profile[0] - 0.27406861906119701) <= 1e-15);
    CHECK(std::abs(k.profile[1] - 0.45186276187760605) <= 1e-15);
    CHECK(std::abs(k.profile[2] - 0.27406861906119701) <= 1e-15);
    CHECK(std::abs(k.at(-1, -1) - 0.075113607954111525) <= 1e-15);
    CHECK(std::abs(k.at(0, 0) - 0.20417995557165811) <= 1e-15);
}

TEST_CASE("gaussian kernel weights sum to 1 and are symmetric") {
    for (double sigma : {0.8, 1.5, 20.0 / 3.0, 50.0}) {
        for (int radius : {1, 3, 20}) {
            const GaussianKernel k = make_gaussian_kernel(sigma, radius);
            CAPTURE(sigma);
            CAPTURE(radius);
            long double profile_sum = 0.0L, weight_sum = 0.0L;
            for (double w : k.profile) profile_sum += w;
            for (double w : k.weights) weight_sum += w;
            CHECK(std::abs(static_cast<double>(profile_sum - 1.0L)) <= 1e-12);
            CHECK(std::abs(static_cast<double>(weight_sum - 1.0L)) <= 1e-12);
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    CHECK(k.at(dy, dx) == k.at(-dy, -dx));
                    CHECK(k.at(dy, dx) == k.at(dx, dy));
                }
        }
    }
    CHECK_THROWS_AS(make_gaussian_kernel(0.0, 1), invalid_parameter_error);
    CHECK_THROWS_AS(make_gaussian_kernel(1.0, 0), invalid_parameter_error);
}

TEST_CASE("default blur radius covers three sigmas") {
    CHECK(default_blur_radius(1.0) == 3);
    CHECK(default_blur_radius(1.5) == 5);  // ceil(4.5)
    CHECK(default_blur_radius(0.1) == 1);
    CHECK(default_blur_radius(20.0 / 3.0) == 20);
    CHECK(default_blur_radius(50.0) == 150);
}

TEST_CASE("blur of an impulse reproduces the kernel exactly") {
    const double sigma = 1.3;
    const int radius = 3;
    ImageTensor x(11, 11, 1);
    x.at(5, 5, 0) = 1.0;
    const ImageTensor y = blur(x, sigma, radius);
    const GaussianKernel k = make_gaussian_kernel(sigma, radius);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            CHECK(y.at(5 + dy, 5 + dx, 0) == k.at(dy, dx));
    CHECK(y.at(0, 0, 0) == 0.0);
}

TEST_CASE("blur keeps constant images constant") {
    const ImageTensor x = constant_like(ImageTensor(9, 7, 2), 0.37);
    const ImageTensor y = blur(x, 2.0);
    for (double v : y.data) CHECK(std::abs(v - 0.37) <= 1e-14);
}

TEST_CASE("blur with sigma zero is the identity") {
    const ImageTensor x = testutil::noise_image(8, 8, 1, 7);
    const ImageTensor y = blur(x, 0.0);
    CHECK(testutil::max_abs_diff(x, y) == 0.0);
}

namespace {

// Reference reflect index, folded iteratively instead of with modulo.
int reflect_ref(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

// Direct 2D convolution oracle with reflect padding.
ImageTensor blur_ref(const ImageTensor& x, const GaussianKernel& k) {
    ImageTensor out = zeros_like(x);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx)
            for (int c = 0; c < x.channels; ++c) {
                double acc = 0.0;
                for (int dy = -k.radius; dy <= k.radius; ++dy)
                    for (int dx = -k.radius; dx <= k.radius; ++dx)
                        acc += k.at(dy, dx) * x.at(reflect_ref(y + dy, x.height),
                                                   reflect_ref(xx + dx, x.width), c);
                out.at(y, xx, c) = acc;
            }
    return out;
}

}  // namespace

TEST_CASE("separable blur matches the direct 2D convolution") {
    const ImageTensor x = testutil::noise_image(12, 9, 2, 21);
    for (double sigma : {0.9, 2.5}) {
        for (int radius : {2, 5, 14}) {  // radius 14 exceeds the 9-wide axis
            CAPTURE(sigma);
            CAPTURE(radius);
            const GaussianKernel k = make_gaussian_kernel(sigma, radius);
            const ImageTensor got = blur(x, sigma, radius);
            const ImageTensor want = blur_ref(x, k);
            CHECK(testutil::max_abs_diff(got, want) <= 1e-12);
        }
    }
}

TEST_CASE("quantize_u8 clamps and rounds half away from zero") {
    ImageTensor x(1, 6, 1);
    x.data = {-0.1, 0.0, 0.5, 1.0, 1.2, 0.4999};
    const std::vector<std::uint8_t> q = quantize_u8(x);
    CHECK(q[0] == 0);
    CHECK(q[1] == 0);
    CHECK(q[2] == 128);  // 127.5 rounds away from zero
    CHECK(q[3] == 255);
    CHECK(q[4] == 255);
    CHECK(q[5] == 127);
}

TEST_CASE("compressed_size is deterministic and tracks content complexity") {
    const ImageTensor flat = constant_like(ImageTensor(32, 32, 1), 0.5);
    const ImageTensor noisy = testutil::noise_image(32, 32, 1, 99);
    const std::size_t s1 = compressed_size(flat);
    const std::size_t s2 = compressed_size(flat);
    CHECK(s1 == s2);
    CHECK(s1 > 0);
    CHECK(compressed_size(noisy) > s1);
}
