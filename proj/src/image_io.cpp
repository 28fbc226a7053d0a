#include "earface/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace earface {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

Tensor read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("read_png: cannot open '" + path.string() + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("read_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("read_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("read_png: '" + path.string() + "' is not decodable");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    if (h <= 0 || w <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("read_png: zero-size image '" + path.string() + "'");
    }

    std::vector<unsigned char> raster(static_cast<size_t>(h) * w * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raster.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor out(1, 3, h, w);
    for (int c = 0; c < 3; ++c) {
        double* dst = out.data() + out.index(0, c, 0, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                dst[y * w + x] = raster[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0;
    }
    return out;
}

void write_png(const Tensor& img, const std::filesystem::path& path) {
    if (img.n() != 1 || (img.c() != 1 && img.c() != 3))
        throw Error("write_png: expected [1,1|3,h,w] tensor, got " + img.shape_str());

    const int h = img.h(), w = img.w(), ch = img.c();
    std::vector<unsigned char> raster(static_cast<size_t>(h) * w * ch);
    for (int c = 0; c < ch; ++c) {
        const double* src = img.data() + img.index(0, c, 0, 0);
        for (int i = 0; i < h * w; ++i) {
            double v = std::clamp(src[i], 0.0, 1.0) * 255.0;
            raster[static_cast<size_t>(i) * ch + c] = static_cast<unsigned char>(std::lround(v));
        }
    }

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw Error("write_png: cannot open '" + path.string() + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("write_png: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("write_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("write_png: encode failed for '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8, ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raster.data() + static_cast<size_t>(y) * w * ch;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace earface
