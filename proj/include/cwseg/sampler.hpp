#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cwseg/context.hpp"
#include "cwseg/image_io.hpp"

namespace cwseg {

enum class SampleCategory : std::uint8_t {
    Interior = 0,
    NearEdgeInside = 1,
    Border = 2,
    NearEdgeOutside = 3,
    NearFrameEdge = 4,
};

inline constexpr std::array<SampleCategory, 5> kAllCategories = {
    SampleCategory::Interior, SampleCategory::NearEdgeInside, SampleCategory::Border,
    SampleCategory::NearEdgeOutside, SampleCategory::NearFrameEdge};

const char* to_string(SampleCategory c) noexcept;
SampleCategory category_from_string(const std::string& s);

inline constexpr int kNoOppositeLabel = std::numeric_limits<int>::max();

/// Category from the pixel's label, its Chebyshev distance to the opposite label
/// and its Chebyshev distance to the frame. Precedence: frame, border, near-edge, interior.
SampleCategory categorize(Label label, int opposite_distance, int frame_distance, int band);

SampleCategory categorize_pixel(const GroundTruthMask& mask, Coord coord, int band);

/// Per-pixel Chebyshev distance to the nearest pixel of the other label
/// (kNoOppositeLabel when the mask holds a single label). Row-major.
std::vector<int> opposite_label_distance(const GroundTruthMask& mask);

struct LabeledSample {
    std::vector<double> features;
    Label label = Label::Background;
    SampleCategory category = SampleCategory::Interior;
    std::string source;
    Coord coord;
};

struct Dataset {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    std::uint64_t seed = 0;
    int window = 0;
    int channels = 1;

    int feature_width() const { return window_length(window, channels); }
};

struct SourceImage {
    RasterImage image;
    GroundTruthMask mask;
    std::string id;
};

struct SamplingConfig {
    int window = 9;
    int total = 1000;
    int band = 4;
    std::uint64_t seed = 0;
};

/// Class-balanced draw of `total` distinct pixels, stratified over categories
/// and source images, split 70/30 into train/test.
Dataset sample_dataset(std::span<const SourceImage> images, const SamplingConfig& config);

/// Number of training samples for a given total (floor of 70%).
int train_count(int total);

void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(std::istream& in);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace cwseg
