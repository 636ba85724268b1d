#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include "pathattr/tensor.hpp"

namespace testutil {

inline double max_abs_diff(const pathattr::ImageTensor& a, const pathattr::ImageTensor& b) {
    REQUIRE(a.same_shape(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

inline double rel_err(double got, double want) {
    const double scale = std::max(1.0, std::abs(want));
    return std::abs(got - want) / scale;
}

/// Deterministic noise image in [0,1].
inline pathattr::ImageTensor noise_image(int h, int w, int c, std::uint64_t seed) {
    pathattr::ImageTensor x(h, w, c);
    std::mt19937_64 g(seed);
    for (double& v : x.data) v = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return x;
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "pathattr_test_XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("cannot create temp directory");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

}  // namespace testutil
