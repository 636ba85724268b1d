#include "pathattr/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "pathattr/errors.hpp"

namespace pathattr {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors via longjmp; the jump lands back at the setjmp inside
// read_png/write_png, where only the png structs need manual teardown before
// rethrowing as a C++ exception.
void on_png_error(png_structp png, png_const_charp msg) {
    std::string* slot = static_cast<std::string*>(png_get_error_ptr(png));
    if (slot) *slot = msg ? msg : "unknown libpng error";
    longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

ImageTensor read_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw io_error("cannot open PNG for reading: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw format_error("not a PNG file: " + path);

    std::string errmsg;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_png_error,
                                             on_png_warning);
    if (!png) throw io_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw io_error("png_create_info_struct failed");
    }

    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int channels = 0;
    std::vector<unsigned char> raw;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("PNG decode failed (" + path + "): " + errmsg);
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
                 nullptr);

    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("16-bit PNG is not supported: " + path);
    }

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);

    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("unsupported PNG channel count after expansion: " +
                           std::to_string(channels));
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(static_cast<std::size_t>(height) * rowbytes);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageTensor out(static_cast<int>(height), static_cast<int>(width), channels);
    for (png_uint_32 y = 0; y < height; ++y) {
        const unsigned char* row = raw.data() + y * rowbytes;
        double* dst = out.data.data() + static_cast<std::size_t>(y) * width * channels;
        for (std::size_t i = 0; i < static_cast<std::size_t>(width) * channels; ++i)
            dst[i] = row[i] / 255.0;
    }
    return out;
}

void write_png(const ImageTensor& x, const std::string& path) {
    validate(x, "write_png input");
    if (x.channels != 1 && x.channels != 3)
        throw invalid_parameter_error("write_png supports 1 or 3 channels, got " +
                                      std::to_string(x.channels));

    const std::vector<std::uint8_t> bytes = quantize_u8(x);

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw io_error("cannot open PNG for writing: " + path);

    std::string errmsg;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_png_error,
                                              on_png_warning);
    if (!png) throw io_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw io_error("png_create_info_struct failed");
    }

    std::vector<png_bytep> rows(x.height);
    const std::size_t rowbytes = static_cast<std::size_t>(x.width) * x.channels;
    for (int y = 0; y < x.height; ++y)
        rows[y] = const_cast<png_bytep>(bytes.data() + y * rowbytes);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG encode failed (" + path + "): " + errmsg);
    }

    png_init_io(png, file.get());
    const int color_type = x.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, static_cast<png_uint_32>(x.width),
                 static_cast<png_uint_32>(x.height), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
}

}  // namespace pathattr
