#include "cwseg/nn_baseline.hpp"

#include <limits>
#include <string>

namespace cwseg {

NNModel::NNModel(std::vector<std::vector<double>> features, std::vector<Label> labels) : labels_(std::move(labels)) {
    detail::require(!features.empty(), "nearest-neighbour model needs at least one sample");
    detail::require(features.size() == labels_.size(), "feature and label counts differ");
    width_ = features.front().size();
    detail::require(width_ > 0, "feature vectors must be non-empty");
    data_.reserve(width_ * features.size());
    for (const auto& f : features) {
        detail::require(f.size() == width_, "all stored feature vectors must share one width");
        data_.insert(data_.end(), f.begin(), f.end());
    }
}

NNModel NNModel::from_samples(std::span<const LabeledSample> samples) {
    std::vector<std::vector<double>> features;
    std::vector<Label> labels;
    features.reserve(samples.size());
    labels.reserve(samples.size());
    for (const auto& s : samples) {
        features.push_back(s.features);
        labels.push_back(s.label);
    }
    return NNModel(std::move(features), std::move(labels));
}

std::size_t nearest_index(const NNModel& model, std::span<const double> query) {
    detail::require(query.size() == std::size_t(model.feature_width()),
                    "query width " + std::to_string(query.size()) + " does not match model width " +
                        std::to_string(model.feature_width()));
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto f = model.features(i);
        // Partial sums only grow, so a candidate is abandoned once it cannot be strictly closer.
        double d2 = 0.0;
        std::size_t k = 0;
        for (; k < f.size(); ++k) {
            const double d = f[k] - query[k];
            d2 += d * d;
            if (d2 >= best_d2) break;
        }
        if (k == f.size() && d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

Label classify_1nn(const NNModel& model, std::span<const double> query) {
    return model.label(nearest_index(model, query));
}

}  // namespace cwseg
