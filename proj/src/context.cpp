#include "cwseg/context.hpp"

#include <algorithm>
#include <string>

namespace cwseg {

int window_length(int size, int channels) {
    detail::require(size >= 1 && size % 2 == 1, "window size must be odd, got " + std::to_string(size));
    detail::require(channels == 1 || channels == 3, "channels must be 1 or 3");
    return size * size * channels;
}

void extract_features(const RasterImage& image, Coord center, int size, std::span<double> out) {
    detail::require(size >= 3 && size % 2 == 1, "window size must be odd and >= 3, got " + std::to_string(size));
    detail::require(image.contains(center.x, center.y),
                    "window center (" + std::to_string(center.x) + "," + std::to_string(center.y) +
                        ") outside image");
    detail::require(out.size() == std::size_t(window_length(size, image.channels)),
                    "feature buffer has wrong length");

    const int half = size / 2;
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy) {
        const int y = std::clamp(center.y + dy, 0, image.height - 1);
        for (int dx = -half; dx <= half; ++dx) {
            const int x = std::clamp(center.x + dx, 0, image.width - 1);
            for (int c = 0; c < image.channels; ++c) out[k++] = normalize_intensity(image.at(x, y, c));
        }
    }
}

ContextWindow extract_window(const RasterImage& image, Coord center, int size) {
    ContextWindow cw;
    cw.center = center;
    cw.size = size;
    cw.channels = image.channels;
    detail::require(size >= 3 && size % 2 == 1, "window size must be odd and >= 3, got " + std::to_string(size));
    cw.features.resize(std::size_t(window_length(size, image.channels)));
    extract_features(image, center, size, cw.features);
    return cw;
}

}  // namespace cwseg
