#include "aidr/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>

namespace aidr {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    // Normalize everything to 8-bit RGB.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    Image img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);

    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("unsupported PPM variant in " + path);
    auto next_token = [&in, &path]() {
        // PPM headers allow '#' comments between tokens.
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("truncated PPM header in " + path);
    };
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error("unsupported PPM geometry in " + path);
    in.get();  // single whitespace after maxval

    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("truncated PPM payload in " + path);
    return img;
}

}  // namespace

Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open image: " + path);
    unsigned char magic[8] = {0};
    probe.read(reinterpret_cast<char*>(magic), 8);
    probe.close();
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        return load_png(path);
    if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
    throw std::runtime_error("unrecognized image format: " + path);
}

void save_png(const Image& img, const std::string& path) {
    if (!img.valid()) throw std::invalid_argument("save_png: invalid image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(
                               img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_ppm(const Image& img, const std::string& path) {
    if (!img.valid()) throw std::invalid_argument("save_ppm: invalid image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

Image synthetic_image(int width, int height, std::uint64_t seed) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("synthetic_image: dimensions must be positive");
    Image img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> texture(-24, 24);
    const double fx = 2.0 * 3.14159265358979323846 * (1.0 + (seed % 5)) / width;
    const double fy = 2.0 * 3.14159265358979323846 * (1.0 + (seed / 5 % 5)) / height;

    std::size_t i = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double base_r = 128.0 + 96.0 * std::sin(fx * x);
            double base_g = 128.0 + 96.0 * std::sin(fy * y);
            double base_b = 128.0 + 96.0 * std::sin(fx * x + fy * y);
            int t = texture(rng);
            auto clamp8 = [](double v) {
                return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
            };
            img.pixels[i++] = clamp8(base_r + t);
            img.pixels[i++] = clamp8(base_g + t);
            img.pixels[i++] = clamp8(base_b + t);
        }
    }
    return img;
}

}  // namespace aidr
