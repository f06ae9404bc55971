#pragma once

#include <span>
#include <vector>

#include "cwseg/image_io.hpp"

namespace cwseg {

/// Flattened, normalized intensities of the size x size neighborhood of `center`.
///
/// Positions are visited row-major; for RGB images the three channels of each
/// pixel are adjacent (channel-minor). Each intensity v becomes v/127.5 - 1,
/// and positions falling outside the frame take the value of the nearest edge
/// pixel.
struct ContextWindow {
    Coord center;
    int size = 0;
    int channels = 1;
    std::vector<double> features;
};

int window_length(int size, int channels);

ContextWindow extract_window(const RasterImage& image, Coord center, int size);

/// Writes the window features into `out`, which must hold window_length(size, channels) values.
void extract_features(const RasterImage& image, Coord center, int size, std::span<double> out);

inline double normalize_intensity(int v) noexcept { return double(v) / 127.5 - 1.0; }

}  // namespace cwseg
