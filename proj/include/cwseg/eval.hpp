#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "cwseg/image_io.hpp"
#include "cwseg/mlp.hpp"
#include "cwseg/nn_baseline.hpp"
#include "cwseg/sampler.hpp"

namespace cwseg {

/// Anything that maps a context-window feature vector to a label.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int feature_width() const = 0;
    virtual Label classify(std::span<const double> features) const = 0;
};

class MLPClassifier final : public Classifier {
public:
    explicit MLPClassifier(MLPModel model) : model_(std::move(model)) {}
    int feature_width() const override { return model_.input_width(); }
    Label classify(std::span<const double> features) const override { return cwseg::classify(model_, features); }
    const MLPModel& model() const noexcept { return model_; }

private:
    MLPModel model_;
};

class NNClassifier final : public Classifier {
public:
    explicit NNClassifier(NNModel model) : model_(std::move(model)) {}
    int feature_width() const override { return model_.feature_width(); }
    Label classify(std::span<const double> features) const override { return classify_1nn(model_, features); }

private:
    NNModel model_;
};

/// Wraps a callable; handy for stub and oracle classifiers.
class FunctionClassifier final : public Classifier {
public:
    using Fn = std::function<Label(std::span<const double>)>;
    FunctionClassifier(int width, Fn fn) : width_(width), fn_(std::move(fn)) {}
    int feature_width() const override { return width_; }
    Label classify(std::span<const double> features) const override { return fn_(features); }

private:
    int width_;
    Fn fn_;
};

/// 100 * correct / total in hundredths of a percent, rounded half away from zero.
long long efficiency_hundredths(long long correct, long long total);
double efficiency(long long correct, long long total);
/// Two-decimal rendering, e.g. "78.43".
std::string format_percentage(long long hundredths);

enum class Split { Train, Test, Image };
const char* to_string(Split split) noexcept;

struct EfficiencyReport {
    Split split = Split::Test;
    long long total = 0;
    long long correct = 0;

    long long hundredths() const { return efficiency_hundredths(correct, total); }
    double efficiency() const { return double(hundredths()) / 100.0; }
    /// `split,total,correct,efficiency`
    std::string line() const;
};

EfficiencyReport evaluate(const Classifier& classifier, std::span<const LabeledSample> samples, Split split);

struct SegmentationOutput {
    RasterImage mask;  // Object -> 255, Background -> 0
    RasterImage gray;  // gray input where the mask is set, 0 elsewhere
};

/// Classifies every pixel from its context window.
SegmentationOutput segment_image(const Classifier& classifier, const RasterImage& image, int window);

/// Gray rendering of the image with background pixels zeroed.
RasterImage masked_gray(const RasterImage& image, const GroundTruthMask& mask);

/// Whole-image pixel accuracy of a 0/255 mask image against ground truth.
EfficiencyReport pixel_accuracy(const RasterImage& predicted_mask, const GroundTruthMask& truth);
EfficiencyReport pixel_accuracy(const GroundTruthMask& predicted, const GroundTruthMask& truth);

}  // namespace cwseg
