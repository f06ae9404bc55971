#include "cwseg/eval.hpp"

#include <string>
#include <vector>

#include "cwseg/context.hpp"

namespace cwseg {

long long efficiency_hundredths(long long correct, long long total) {
    detail::require(total >= 1, "efficiency needs total >= 1");
    detail::require(correct >= 0 && correct <= total, "efficiency needs 0 <= correct <= total");
    // round(10000 c / t) for non-negative operands, in exact integer arithmetic.
    return (20000 * correct + total) / (2 * total);
}

double efficiency(long long correct, long long total) { return double(efficiency_hundredths(correct, total)) / 100.0; }

std::string format_percentage(long long hundredths) {
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(hundredths / 100) + "." + frac;
}

const char* to_string(Split split) noexcept {
    switch (split) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Image: return "image";
    }
    return "?";
}

std::string EfficiencyReport::line() const {
    return std::string(to_string(split)) + "," + std::to_string(total) + "," + std::to_string(correct) + "," +
           format_percentage(hundredths());
}

EfficiencyReport evaluate(const Classifier& classifier, std::span<const LabeledSample> samples, Split split) {
    detail::require(!samples.empty(), "cannot evaluate an empty split");
    EfficiencyReport report;
    report.split = split;
    for (const auto& s : samples) {
        detail::require(s.features.size() == std::size_t(classifier.feature_width()),
                        "sample width " + std::to_string(s.features.size()) + " does not match classifier width " +
                            std::to_string(classifier.feature_width()));
        ++report.total;
        if (classifier.classify(s.features) == s.label) ++report.correct;
    }
    return report;
}

SegmentationOutput segment_image(const Classifier& classifier, const RasterImage& image, int window) {
    const int width = window_length(window, image.channels);
    detail::require(classifier.feature_width() == width,
                    "classifier width " + std::to_string(classifier.feature_width()) + " does not match window " +
                        std::to_string(window) + " on a " + std::to_string(image.channels) + "-channel image (" +
                        std::to_string(width) + ")");
    GroundTruthMask labels(image.width, image.height);
    std::vector<double> features(static_cast<std::size_t>(width));
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            extract_features(image, {x, y}, window, features);
            labels.at(x, y) = classifier.classify(features);
        }
    }
    return {mask_to_image(labels), masked_gray(image, labels)};
}

RasterImage masked_gray(const RasterImage& image, const GroundTruthMask& mask) {
    detail::require(image.width == mask.width && image.height == mask.height, "mask and image differ in size");
    RasterImage gray = to_gray(image);
    for (std::size_t i = 0; i < gray.data.size(); ++i)
        if (mask.labels[i] != Label::Object) gray.data[i] = 0;
    return gray;
}

EfficiencyReport pixel_accuracy(const GroundTruthMask& predicted, const GroundTruthMask& truth) {
    detail::require(predicted.width == truth.width && predicted.height == truth.height,
                    "predicted and ground-truth masks differ in size");
    EfficiencyReport report;
    report.split = Split::Image;
    report.total = (long long)truth.labels.size();
    for (std::size_t i = 0; i < truth.labels.size(); ++i)
        if (predicted.labels[i] == truth.labels[i]) ++report.correct;
    return report;
}

EfficiencyReport pixel_accuracy(const RasterImage& predicted_mask, const GroundTruthMask& truth) {
    return pixel_accuracy(mask_from_image(predicted_mask), truth);
}

}  // namespace cwseg
