#pragma once

#include <span>
#include <vector>

#include "cwseg/image_io.hpp"
#include "cwseg/sampler.hpp"

namespace cwseg {

/// Stored context windows for 1-nearest-neighbour classification.
class NNModel {
public:
    NNModel(std::vector<std::vector<double>> features, std::vector<Label> labels);
    static NNModel from_samples(std::span<const LabeledSample> samples);

    std::size_t size() const noexcept { return labels_.size(); }
    int feature_width() const noexcept { return int(width_); }
    std::span<const double> features(std::size_t i) const { return {data_.data() + i * width_, width_}; }
    Label label(std::size_t i) const { return labels_[i]; }

private:
    std::size_t width_ = 0;
    std::vector<double> data_;  // row-major, one stored window per row
    std::vector<Label> labels_;
};

/// Index of the stored sample at minimum Euclidean distance; ties go to the lowest index.
std::size_t nearest_index(const NNModel& model, std::span<const double> query);

Label classify_1nn(const NNModel& model, std::span<const double> query);

}  // namespace cwseg
