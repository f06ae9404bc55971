#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cwseg/image_io.hpp"

namespace cwseg {

/// Even-symmetric Gabor filter bank plus the post-processing used for
/// unsupervised two-class texture segmentation.
struct GaborSpec {
    std::vector<double> orientations_deg{0.0, 45.0, 90.0, 135.0};
    std::vector<double> frequencies{0.125, 0.25};  // cycles per pixel
    std::optional<double> sigma;                   // default 0.56 / frequency
    std::optional<int> kernel_radius;              // default ceil(3 sigma)
    double nonlinearity = 0.25;                    // alpha in |tanh(alpha * response)|
    double smoothing_factor = 3.0;                 // smoothing std = factor * sigma
    int max_iterations = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GaborFilter {
    double orientation_deg = 0.0;
    double frequency = 0.125;
    double sigma = 4.48;
    int radius = 14;
};

/// One filter per (frequency, orientation), frequency-major.
std::vector<GaborFilter> filter_bank(const GaborSpec& spec);

struct Kernel {
    int radius = 0;
    std::vector<double> values;  // (2r+1)^2, row-major, origin at the centre

    int side() const noexcept { return 2 * radius + 1; }
    double at(int dx, int dy) const {
        return values[std::size_t(dy + radius) * std::size_t(side()) + std::size_t(dx + radius)];
    }
};

/// exp(-(x'^2 + y'^2) / (2 sigma^2)) * cos(2 pi f x'), minus its mean.
Kernel gabor_kernel(const GaborFilter& filter);

/// Kernel response with replicate padding, evaluated as sum k(d) * (I(p + d) - I(p)).
/// Equal to plain correlation for a zero-sum kernel, and exactly 0 on flat regions.
std::vector<double> filter_response(const RasterImage& gray, const Kernel& kernel);

/// Separable Gaussian blur of a width x height scalar field with replicate padding.
std::vector<double> gaussian_smooth(std::span<const double> field, int width, int height, double sigma);

struct FeatureStack {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;  // pixel-major: data[pixel * channels + channel]

    double at(std::size_t pixel, int channel) const { return data[pixel * std::size_t(channels) + std::size_t(channel)]; }
};

/// Smoothed |tanh| energies, one channel per filter of the bank.
FeatureStack gabor_features(const RasterImage& gray, const GaborSpec& spec);

struct TwoMeansResult {
    std::vector<std::uint8_t> assignment;  // 0 or 1 per point
    std::vector<double> objective;         // within-cluster sum of squares after each assignment step
    int iterations = 0;
    bool degenerate = false;  // every point identical; all assigned to cluster 0
};

/// Lloyd's algorithm with k = 2 on `count` points of dimension `dim` (row-major).
/// The first centre is a seeded random point, the second the point farthest from it.
TwoMeansResult two_means(std::span<const double> points, std::size_t dim, std::uint64_t seed, int max_iterations);

enum class GaborStatus { Ok, Degenerate };

struct GaborSegmentation {
    GroundTruthMask labels;
    GaborStatus status = GaborStatus::Ok;
    std::vector<double> objective;
    int iterations = 0;
};

GaborSegmentation segment_gabor(const RasterImage& gray, const GaborSpec& spec);

}  // namespace cwseg
