#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <fstream>
#include <vector>

#include "pathattr/errors.hpp"
#include "pathattr/png_io.hpp"
#include "pathattr/tensor.hpp"
#include "testutil.hpp"

using namespace pathattr;

namespace {

// Writes a PNG the reader is not expected to accept or must convert; the
// production writer only emits 8-bit gray/RGB.
void write_raw_png(const std::string& path, int width, int height, int bit_depth,
                   int color_type, const std::vector<unsigned char>& row_bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    REQUIRE(png != nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(info != nullptr);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, f);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_color palette[2] = {{255, 0, 0}, {0, 0, 255}};
        png_set_PLTE(png, info, palette, 2);
    }
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(row_bytes.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

}  // namespace

TEST_CASE("grayscale round trip is exact after quantization") {
    testutil::TempDir dir;
    const std::string path = dir.file("gray.png");
    const ImageTensor x = testutil::noise_image(13, 9, 1, 5);
    write_png(x, path);
    const ImageTensor y = read_png(path);
    REQUIRE(y.same_shape(x));
    const std::vector<std::uint8_t> q = quantize_u8(x);
    for (int i = 0; i < x.size(); ++i) CHECK(y.data[i] == q[i] / 255.0);
    write_png(y, path);
    CHECK(testutil::max_abs_diff(read_png(path), y) == 0.0);
}

TEST_CASE("rgb round trip is exact after quantization") {
    testutil::TempDir dir;
    const std::string path = dir.file("rgb.png");
    const ImageTensor x = testutil::noise_image(7, 11, 3, 6);
    write_png(x, path);
    const ImageTensor y = read_png(path);
    REQUIRE(y.same_shape(x));
    const std::vector<std::uint8_t> q = quantize_u8(x);
    for (int i = 0; i < x.size(); ++i) CHECK(y.data[i] == q[i] / 255.0);
}

TEST_CASE("write clamps values outside the unit interval") {
    testutil::TempDir dir;
    const std::string path = dir.file("clamp.png");
    ImageTensor x(1, 3, 1);
    x.data = {-0.5, 0.25, 1.5};
    write_png(x, path);
    const ImageTensor y = read_png(path);
    CHECK(y.data[0] == 0.0);
    CHECK(y.data[1] == 64.0 / 255.0);
    CHECK(y.data[2] == 1.0);
}

TEST_CASE("write rejects unsupported channel counts") {
    testutil::TempDir dir;
    CHECK_THROWS_AS(write_png(ImageTensor(4, 4, 2), dir.file("two.png")),
                    invalid_parameter_error);
    CHECK_THROWS_AS(write_png(ImageTensor(4, 4, 4), dir.file("four.png")),
                    invalid_parameter_error);
}

TEST_CASE("read reports missing files and non-PNG content") {
    testutil::TempDir dir;
    CHECK_THROWS_AS(read_png(dir.file("absent.png")), io_error);
    const std::string garbage = dir.file("garbage.png");
    std::ofstream(garbage) << "definitely not a png";
    CHECK_THROWS_AS(read_png(garbage), format_error);
}

TEST_CASE("read rejects 16-bit images") {
    testutil::TempDir dir;
    const std::string path = dir.file("deep.png");
    write_raw_png(path, 4, 3, 16, PNG_COLOR_TYPE_GRAY,
                  std::vector<unsigned char>(4 * 2, 0x7F));
    CHECK_THROWS_AS(read_png(path), format_error);
}

TEST_CASE("palette images expand to rgb") {
    testutil::TempDir dir;
    const std::string path = dir.file("pal.png");
    write_raw_png(path, 2, 2, 8, PNG_COLOR_TYPE_PALETTE, {0, 1});
    const ImageTensor y = read_png(path);
    REQUIRE(y.channels == 3);
    CHECK(y.at(0, 0, 0) == 1.0);
    CHECK(y.at(0, 0, 2) == 0.0);
    CHECK(y.at(0, 1, 0) == 0.0);
    CHECK(y.at(0, 1, 2) == 1.0);
    CHECK(y.at(1, 0, 0) == 1.0);
}

TEST_CASE("alpha channels are stripped on read") {
    testutil::TempDir dir;
    const std::string path = dir.file("ga.png");
    // gray=200 alpha=10 per pixel
    write_raw_png(path, 3, 1, 8, PNG_COLOR_TYPE_GRAY_ALPHA, {200, 10, 200, 10, 200, 10});
    const ImageTensor y = read_png(path);
    REQUIRE(y.channels == 1);
    REQUIRE(y.width == 3);
    for (double v : y.data) CHECK(v == 200.0 / 255.0);
}
