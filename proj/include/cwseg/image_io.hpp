#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cwseg/errors.hpp"

namespace cwseg {

enum class Label : std::uint8_t { Background = 0, Object = 1 };

const char* to_string(Label label) noexcept;
Label label_from_string(const std::string& s);

struct Coord {
    int x = 0;
    int y = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
};

/// Row-major 8-bit raster. For channels == 3 the per-pixel order is R,G,B.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c, std::uint8_t fill = 0);
    RasterImage(int w, int h, int c, std::vector<std::uint8_t> values);

    std::size_t pixel_count() const noexcept { return std::size_t(width) * std::size_t(height); }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }

    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * std::size_t(channels) + std::size_t(c)];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * std::size_t(channels) + std::size_t(c)];
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

struct GroundTruthMask {
    int width = 0;
    int height = 0;
    std::vector<Label> labels;

    GroundTruthMask() = default;
    GroundTruthMask(int w, int h, Label fill = Label::Background);

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
    Label at(int x, int y) const { return labels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
    Label& at(int x, int y) { return labels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

    friend bool operator==(const GroundTruthMask&, const GroundTruthMask&) = default;
};

// Binary netpbm only: P5 (gray) and P6 (RGB), maxval 255.
RasterImage decode_netpbm(const std::string& bytes);
std::string encode_netpbm(const RasterImage& image);

RasterImage read_image(const std::filesystem::path& path);
void write_image(const RasterImage& image, const std::filesystem::path& path);

/// BT.601 luma, rounded half away from zero.
RasterImage rgb_to_gray(const RasterImage& image);

/// Returns the image unchanged if already gray, otherwise its luma.
RasterImage to_gray(const RasterImage& image);

/// 255 -> Object, 0 -> Background; anything else is a MaskFormatError naming (x,y).
GroundTruthMask mask_from_image(const RasterImage& image);
RasterImage mask_to_image(const GroundTruthMask& mask);

GroundTruthMask read_mask(const std::filesystem::path& path);
void write_mask(const GroundTruthMask& mask, const std::filesystem::path& path);

}  // namespace cwseg
