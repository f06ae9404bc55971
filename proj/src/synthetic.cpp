#include "cwseg/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "cwseg/context.hpp"
#include "cwseg/random.hpp"

namespace cwseg {

namespace {

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

SyntheticScene two_texture_scene(int size, std::uint64_t seed) {
    detail::require(size >= 16, "synthetic scene must be at least 16 pixels");
    Rng rng(seed);
    SyntheticScene scene{RasterImage(size, size, 1), GroundTruthMask(size, size)};

    const double cx = 0.5 * (size - 1), cy = 0.5 * (size - 1);
    const double ax = 0.30 * size, ay = 0.38 * size;
    constexpr int block = 4;
    const int blocks = (size + block - 1) / block;
    std::vector<double> block_level(std::size_t(blocks) * std::size_t(blocks));
    for (double& v : block_level) v = rng.uniform(30.0, 110.0);

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x - cx) / ax, v = (y - cy) / ay;
            const bool inside = u * u + v * v <= 1.0;
            const double noise = 6.0 * rng.normal();
            double value;
            if (inside) {
                value = 165.0 + 40.0 * std::sin(2.0 * M_PI * (x + y) / 8.0) + noise;
                scene.mask.at(x, y) = Label::Object;
            } else {
                value = block_level[std::size_t(y / block) * std::size_t(blocks) + std::size_t(x / block)] + noise;
            }
            scene.image.at(x, y) = to_u8(value);
        }
    }
    return scene;
}

SyntheticScene stripes_vs_uniform(int width, int height, int period) {
    detail::require(width >= 4 && height >= 1 && period >= 2, "bad stripes scene dimensions");
    SyntheticScene scene{RasterImage(width, height, 1), GroundTruthMask(width, height)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x < width / 2) {
                scene.image.at(x, y) = to_u8(128.0 + 80.0 * std::cos(2.0 * M_PI * x / period));
                scene.mask.at(x, y) = Label::Object;
            } else {
                scene.image.at(x, y) = 128;
            }
        }
    }
    return scene;
}

std::vector<LabeledSample> gaussian_texture_windows(int count, int window, std::uint64_t seed) {
    detail::require(count >= 2, "need at least two windows");
    const int width = window_length(window, 1);
    Rng rng(seed);
    std::vector<LabeledSample> out;
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        LabeledSample s;
        s.label = i % 2 == 0 ? Label::Object : Label::Background;
        const double mean = s.label == Label::Object ? 170.0 : 85.0;
        s.features.resize(std::size_t(width));
        for (double& f : s.features) f = normalize_intensity(to_u8(mean + 25.0 * rng.normal()));
        s.source = "gaussian";
        s.coord = {i, 0};
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace cwseg
