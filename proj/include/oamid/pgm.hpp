#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace oamid {

// Binary (P5) grayscale image, 8 or 16 bit.
struct GrayImage
{
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> pixels;  // row-major

    std::uint16_t at(int row, int col) const
    {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
};

// Throws std::runtime_error on I/O or format errors, including samples above maxval.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

} // namespace oamid
