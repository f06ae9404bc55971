#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cwseg/image_io.hpp"
#include "cwseg/sampler.hpp"

namespace cwseg {

/// Layer widths [n_in, h1, h2, n_out]; n_out is always 2.
struct LayerSpec {
    std::vector<int> sizes{81, 18, 10, 2};

    int input_width() const { return sizes.front(); }
    std::size_t layer_count() const { return sizes.size() - 1; }

    /// The default 81-18-10-2 shape with its input widened or narrowed to `n_in`.
    static LayerSpec with_input(int n_in) { return LayerSpec{{n_in, 18, 10, 2}}; }
    static LayerSpec parse(const std::string& text);
    std::string to_string() const;

    void validate() const;
    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
    Eigen::MatrixXd weights;  // fan_out x fan_in
    Eigen::VectorXd bias;     // fan_out
};

struct MLPModel {
    LayerSpec spec;
    std::vector<Layer> layers;

    /// Zero-initialized model of the given shape.
    explicit MLPModel(LayerSpec s = {});

    int input_width() const { return spec.input_width(); }
};

bool operator==(const MLPModel& a, const MLPModel& b);

using OutputPair = std::array<double, 2>;

/// Object -> (1, -1), Background -> (-1, 1).
OutputPair target_for(Label label) noexcept;

inline double tansig(double x) noexcept { return std::tanh(x); }

struct ForwardResult {
    double o1 = 0.0;
    double o2 = 0.0;
    /// activations[0] is the input, activations.back() the output layer.
    std::vector<Eigen::VectorXd> activations;
};

ForwardResult forward(const MLPModel& model, std::span<const double> features);

/// Object iff o1 > o2; a tie goes to Background.
inline Label decide(double o1, double o2) noexcept { return o1 > o2 ? Label::Object : Label::Background; }

Label classify(const MLPModel& model, std::span<const double> features);

/// Mean over every scalar component of (target - prediction)^2.
double mse(std::span<const OutputPair> predictions, std::span<const OutputPair> targets);

/// MSE of the model over a set of labeled samples.
double dataset_mse(const MLPModel& model, std::span<const LabeledSample> samples);

/// Uniform weights and biases in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
MLPModel init_weights(const LayerSpec& spec, std::uint64_t seed);

// Parameters are ordered layer by layer: weights row-major, then the bias.
std::size_t parameter_count(const LayerSpec& spec);
std::size_t weight_offset(const LayerSpec& spec, std::size_t layer);
std::size_t bias_offset(const LayerSpec& spec, std::size_t layer);
Eigen::VectorXd flatten(const MLPModel& model);
void unflatten(MLPModel& model, const Eigen::VectorXd& params);

/// Gradient of one sample's MSE with respect to every parameter, by reverse accumulation.
Eigen::VectorXd backprop_gradient(const MLPModel& model, std::span<const double> features, const OutputPair& target);

/// Writes d(output_k)/d(param) for k = 0, 1 into the two columns of `out` (P x 2).
void output_jacobian(const MLPModel& model, std::span<const double> features, Eigen::Ref<Eigen::MatrixXd> out);

struct TrainConfig {
    int max_epochs = 200;
    double mse_goal = 1e-3;
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    double lambda_max = 1e10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Solves (normal + lambda I) step = rhs by Cholesky; empty when the damped matrix is not positive definite.
std::optional<Eigen::VectorXd> solve_damped(const Eigen::MatrixXd& normal, const Eigen::VectorXd& rhs, double lambda);

enum class TrainStatus { GoalReached, MaxEpochs, LambdaExceeded };
const char* to_string(TrainStatus status) noexcept;

struct TrainLogRow {
    int epoch = 0;
    double mse = 0.0;
    double lambda = 0.0;
    bool accepted = false;
};

struct TrainResult {
    MLPModel model;
    /// MSE before training followed by the MSE after each accepted epoch.
    std::vector<double> history;
    /// Every trial step; epoch 0 is the starting point.
    std::vector<TrainLogRow> log;
    TrainStatus status = TrainStatus::MaxEpochs;
    int epochs = 0;

    bool converged() const noexcept { return status != TrainStatus::LambdaExceeded; }
};

/// Full-batch Levenberg-Marquardt on the training samples.
TrainResult train_lm(const MLPModel& initial, std::span<const LabeledSample> samples, const TrainConfig& config);
TrainResult train_lm(const MLPModel& initial, const Dataset& dataset, const TrainConfig& config);

struct GradientDescentConfig {
    double step = 0.01;
    int max_epochs = 200;
    double mse_goal = 1e-3;
};

/// Fixed-step batch gradient descent. Only used to cross-check the LM trainer.
TrainResult train_gd(const MLPModel& initial, std::span<const LabeledSample> samples,
                     const GradientDescentConfig& config);

void write_train_log(std::span<const TrainLogRow> log, std::ostream& out);

void write_model(const MLPModel& model, std::ostream& out);
MLPModel read_model(std::istream& in);
void save_model(const MLPModel& model, const std::filesystem::path& path);
MLPModel load_model(const std::filesystem::path& path);

}  // namespace cwseg
