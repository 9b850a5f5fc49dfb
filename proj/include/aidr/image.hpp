#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aidr {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size == width * height * 3

    std::size_t byte_count() const { return pixels.size(); }
    bool valid() const {
        return width > 0 && height > 0 &&
               pixels.size() == static_cast<std::size_t>(width) * height * 3;
    }
};

// Reads a PNG or binary PPM (P6) file, deciding by magic bytes.
Image load_image(const std::string& path);

void save_png(const Image& img, const std::string& path);
void save_ppm(const Image& img, const std::string& path);

// Procedural scene frame: seeded gradient-plus-texture pattern so the
// whole pipeline runs without any external dataset download.
Image synthetic_image(int width, int height, std::uint64_t seed);

}  // namespace aidr
