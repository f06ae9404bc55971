#include "cwseg/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cwseg/random.hpp"

namespace cwseg {

LayerSpec LayerSpec::parse(const std::string& text) {
    LayerSpec spec;
    spec.sizes.clear();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            spec.sizes.push_back(v);
        } catch (const std::logic_error&) {
            throw PreconditionError("layer list: '" + item + "' is not an integer");
        }
    }
    spec.validate();
    return spec;
}

std::string LayerSpec::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
    return s;
}

void LayerSpec::validate() const {
    detail::require(sizes.size() == 4, "layer spec needs exactly four sizes (n_in,h1,h2,n_out)");
    for (int s : sizes) detail::require(s >= 1, "layer sizes must be >= 1");
    detail::require(sizes.back() == 2, "output layer must have 2 neurons");
}

MLPModel::MLPModel(LayerSpec s) : spec(std::move(s)) {
    spec.validate();
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        layers.push_back({Eigen::MatrixXd::Zero(spec.sizes[l + 1], spec.sizes[l]),
                          Eigen::VectorXd::Zero(spec.sizes[l + 1])});
    }
}

bool operator==(const MLPModel& a, const MLPModel& b) {
    if (!(a.spec == b.spec) || a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weights != b.layers[l].weights || a.layers[l].bias != b.layers[l].bias) return false;
    }
    return true;
}

OutputPair target_for(Label label) noexcept {
    return label == Label::Object ? OutputPair{1.0, -1.0} : OutputPair{-1.0, 1.0};
}

ForwardResult forward(const MLPModel& model, std::span<const double> features) {
    detail::require(features.size() == std::size_t(model.input_width()),
                    "feature length " + std::to_string(features.size()) + " does not match network input " +
                        std::to_string(model.input_width()));
    ForwardResult r;
    r.activations.reserve(model.layers.size() + 1);
    r.activations.emplace_back(Eigen::Map<const Eigen::VectorXd>(features.data(), Eigen::Index(features.size())));
    for (const Layer& layer : model.layers) {
        Eigen::VectorXd z = layer.weights * r.activations.back() + layer.bias;
        r.activations.emplace_back(z.unaryExpr([](double v) { return tansig(v); }));
    }
    r.o1 = r.activations.back()(0);
    r.o2 = r.activations.back()(1);
    return r;
}

Label classify(const MLPModel& model, std::span<const double> features) {
    const ForwardResult r = forward(model, features);
    return decide(r.o1, r.o2);
}

double mse(std::span<const OutputPair> predictions, std::span<const OutputPair> targets) {
    detail::require(!predictions.empty(), "mse of an empty batch");
    detail::require(predictions.size() == targets.size(), "mse: predictions and targets differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            const double e = targets[i][k] - predictions[i][k];
            sum += e * e;
        }
    }
    return sum / double(2 * predictions.size());
}

double dataset_mse(const MLPModel& model, std::span<const LabeledSample> samples) {
    std::vector<OutputPair> predictions, targets;
    predictions.reserve(samples.size());
    targets.reserve(samples.size());
    for (const auto& s : samples) {
        const ForwardResult r = forward(model, s.features);
        predictions.push_back({r.o1, r.o2});
        targets.push_back(target_for(s.label));
    }
    return mse(predictions, targets);
}

MLPModel init_weights(const LayerSpec& spec, std::uint64_t seed) {
    MLPModel model(spec);
    Rng rng(seed);
    for (Layer& layer : model.layers) {
        const double bound = 1.0 / std::sqrt(double(layer.weights.cols()));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = rng.uniform(-bound, bound);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-bound, bound);
    }
    return model;
}

std::size_t weight_offset(const LayerSpec& spec, std::size_t layer) {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += std::size_t(spec.sizes[l + 1]) * std::size_t(spec.sizes[l] + 1);
    return off;
}

std::size_t bias_offset(const LayerSpec& spec, std::size_t layer) {
    return weight_offset(spec, layer) + std::size_t(spec.sizes[layer + 1]) * std::size_t(spec.sizes[layer]);
}

std::size_t parameter_count(const LayerSpec& spec) { return weight_offset(spec, spec.layer_count()); }

Eigen::VectorXd flatten(const MLPModel& model) {
    Eigen::VectorXd p(Eigen::Index(parameter_count(model.spec)));
    Eigen::Index k = 0;
    for (const Layer& layer : model.layers) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) p(k++) = layer.weights(i, j);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) p(k++) = layer.bias(i);
    }
    return p;
}

void unflatten(MLPModel& model, const Eigen::VectorXd& params) {
    detail::require(params.size() == Eigen::Index(parameter_count(model.spec)), "parameter vector has wrong length");
    Eigen::Index k = 0;
    for (Layer& layer : model.layers) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = params(k++);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = params(k++);
    }
}

Eigen::VectorXd backprop_gradient(const MLPModel& model, std::span<const double> features, const OutputPair& target) {
    const ForwardResult r = forward(model, features);
    const auto& acts = r.activations;
    const std::size_t n_layers = model.layers.size();
    Eigen::VectorXd grad(Eigen::Index(parameter_count(model.spec)));

    const Eigen::VectorXd& out = acts.back();
    const double n_out = double(out.size());
    Eigen::VectorXd delta(out.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        const double e = target[std::size_t(k)] - out(k);
        delta(k) = -2.0 / n_out * e * (1.0 - out(k) * out(k));
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const Eigen::VectorXd& input = acts[l];
        const Layer& layer = model.layers[l];
        Eigen::Index k = Eigen::Index(weight_offset(model.spec, l));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) grad(k++) = delta(i) * input(j);
        grad.segment(k, delta.size()) = delta;
        if (l > 0) {
            Eigen::VectorXd back = layer.weights.transpose() * delta;
            delta = back.array() * (1.0 - input.array().square());
        }
    }
    return grad;
}

void output_jacobian(const MLPModel& model, std::span<const double> features, Eigen::Ref<Eigen::MatrixXd> out) {
    detail::require(out.rows() == Eigen::Index(parameter_count(model.spec)) && out.cols() == 2,
                    "jacobian buffer has wrong shape");
    const ForwardResult r = forward(model, features);
    const auto& acts = r.activations;

    // delta(i, k) = d(output_k) / d(pre-activation of unit i) in the current layer.
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(2, 2);
    for (Eigen::Index k = 0; k < 2; ++k) delta(k, k) = 1.0 - acts.back()(k) * acts.back()(k);

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const Eigen::VectorXd& input = acts[l];
        const Layer& layer = model.layers[l];
        const Eigen::Index fan_in = layer.weights.cols();
        const Eigen::Index w0 = Eigen::Index(weight_offset(model.spec, l));
        const Eigen::Index b0 = Eigen::Index(bias_offset(model.spec, l));
        for (Eigen::Index k = 0; k < 2; ++k) {
            for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
                const double d = delta(i, k);
                out.col(k).segment(w0 + i * fan_in, fan_in) = d * input;
                out(b0 + i, k) = d;
            }
        }
        if (l > 0) {
            Eigen::MatrixXd back = layer.weights.transpose() * delta;
            delta = (1.0 - input.array().square()).matrix().asDiagonal() * back;
        }
    }
}

void TrainConfig::validate() const {
    detail::require(max_epochs >= 0, "max_epochs must be >= 0");
    detail::require(lambda0 > 0.0, "lambda0 must be > 0");
    detail::require(lambda_up > 1.0 && lambda_down > 1.0, "lambda_up and lambda_down must be > 1");
    detail::require(lambda_max >= lambda0, "lambda_max must be >= lambda0");
}

const char* to_string(TrainStatus status) noexcept {
    switch (status) {
        case TrainStatus::GoalReached: return "goal_reached";
        case TrainStatus::MaxEpochs: return "max_epochs";
        case TrainStatus::LambdaExceeded: return "lambda_exceeded";
    }
    return "?";
}

namespace {

void check_samples(const MLPModel& model, std::span<const LabeledSample> samples) {
    detail::require(!samples.empty(), "training set is empty");
    for (const auto& s : samples)
        detail::require(s.features.size() == std::size_t(model.input_width()),
                        "sample width " + std::to_string(s.features.size()) + " does not match network input " +
                            std::to_string(model.input_width()));
}

// Residuals e = target - output, two per sample, in sample order.
Eigen::VectorXd residuals(const MLPModel& model, std::span<const LabeledSample> samples) {
    Eigen::VectorXd e(Eigen::Index(2 * samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const ForwardResult r = forward(model, samples[s].features);
        const OutputPair t = target_for(samples[s].label);
        e(Eigen::Index(2 * s)) = t[0] - r.o1;
        e(Eigen::Index(2 * s + 1)) = t[1] - r.o2;
    }
    return e;
}

}  // namespace

std::optional<Eigen::VectorXd> solve_damped(const Eigen::MatrixXd& normal, const Eigen::VectorXd& rhs, double lambda) {
    detail::require(normal.rows() == normal.cols() && normal.rows() == rhs.size(), "damped solve: shape mismatch");
    // Only the lower triangle of `normal` is read.
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(damped);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd step = llt.solve(rhs);
    if (!step.allFinite()) return std::nullopt;
    return step;
}

TrainResult train_lm(const MLPModel& initial, std::span<const LabeledSample> samples, const TrainConfig& config) {
    config.validate();
    check_samples(initial, samples);

    TrainResult result{initial, {}, {}, TrainStatus::MaxEpochs, 0};
    MLPModel trial = initial;
    Eigen::VectorXd params = flatten(initial);
    const Eigen::Index n_params = params.size();
    const Eigen::Index n_residuals = Eigen::Index(2 * samples.size());

    Eigen::VectorXd e = residuals(result.model, samples);
    double current = e.squaredNorm() / double(n_residuals);
    double lambda = config.lambda0;
    result.history.push_back(current);
    result.log.push_back({0, current, lambda, true});

    // Transposed Jacobian of the outputs: column r holds d(output_r)/d(params).
    Eigen::MatrixXd jt(n_params, n_residuals);
    Eigen::MatrixXd normal(n_params, n_params);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (current <= config.mse_goal) break;

        for (std::size_t s = 0; s < samples.size(); ++s)
            output_jacobian(result.model, samples[s].features, jt.middleCols(Eigen::Index(2 * s), 2));
        normal.setZero();
        normal.selfadjointView<Eigen::Lower>().rankUpdate(jt);
        const Eigen::VectorXd rhs = jt * e;

        bool accepted = false;
        while (!accepted) {
            if (lambda > config.lambda_max) {
                result.status = TrainStatus::LambdaExceeded;
                return result;
            }
            const auto step = solve_damped(normal, rhs, lambda);
            if (!step) {
                result.log.push_back({epoch, current, lambda, false});
                lambda *= config.lambda_up;
                continue;
            }
            unflatten(trial, params + *step);
            const Eigen::VectorXd trial_e = residuals(trial, samples);
            const double trial_mse = trial_e.squaredNorm() / double(n_residuals);
            if (trial_mse < current) {
                result.log.push_back({epoch, trial_mse, lambda, true});
                params += *step;
                std::swap(result.model, trial);
                e = trial_e;
                current = trial_mse;
                lambda /= config.lambda_down;
                accepted = true;
            } else {
                result.log.push_back({epoch, trial_mse, lambda, false});
                lambda *= config.lambda_up;
            }
        }
        result.history.push_back(current);
        result.epochs = epoch;
    }
    result.status = current <= config.mse_goal ? TrainStatus::GoalReached : TrainStatus::MaxEpochs;
    return result;
}

TrainResult train_lm(const MLPModel& initial, const Dataset& dataset, const TrainConfig& config) {
    return train_lm(initial, std::span<const LabeledSample>(dataset.train), config);
}

TrainResult train_gd(const MLPModel& initial, std::span<const LabeledSample> samples,
                     const GradientDescentConfig& config) {
    detail::require(config.step > 0.0, "gradient descent step must be > 0");
    check_samples(initial, samples);

    TrainResult result{initial, {}, {}, TrainStatus::MaxEpochs, 0};
    double current = dataset_mse(result.model, samples);
    result.history.push_back(current);
    result.log.push_back({0, current, 0.0, true});
    Eigen::VectorXd params = flatten(initial);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (current <= config.mse_goal) break;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
        for (const auto& s : samples) grad += backprop_gradient(result.model, s.features, target_for(s.label));
        grad /= double(samples.size());
        params -= config.step * grad;
        unflatten(result.model, params);
        current = dataset_mse(result.model, samples);
        result.history.push_back(current);
        result.log.push_back({epoch, current, 0.0, true});
        result.epochs = epoch;
    }
    result.status = current <= config.mse_goal ? TrainStatus::GoalReached : TrainStatus::MaxEpochs;
    return result;
}

void write_train_log(std::span<const TrainLogRow> log, std::ostream& out) {
    out << "epoch,mse,lambda,accepted\n";
    char buf[96];
    for (const auto& row : log) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", row.epoch, row.mse, row.lambda, row.accepted ? 1 : 0);
        out << buf;
    }
}

void write_model(const MLPModel& model, std::ostream& out) {
    out << model.spec.sizes[0];
    for (std::size_t i = 1; i < model.spec.sizes.size(); ++i) out << ' ' << model.spec.sizes[i];
    out << '\n';
    char buf[32];
    auto write_row = [&](auto&& row) {
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row(j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    };
    for (const Layer& layer : model.layers) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) write_row(layer.weights.row(i));
        write_row(layer.bias);
    }
}

MLPModel read_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("model: empty file");
    LayerSpec spec;
    spec.sizes.clear();
    {
        std::istringstream ss(line);
        int v;
        while (ss >> v) spec.sizes.push_back(v);
        if (!ss.eof()) throw FormatError("model: malformed layer-size header '" + line + "'");
    }
    try {
        spec.validate();
    } catch (const PreconditionError& e) {
        throw FormatError(std::string("model: ") + e.what());
    }

    std::vector<std::string> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(line);

    std::size_t expected = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) expected += std::size_t(spec.sizes[l + 1]) + 1;
    if (rows.size() != expected)
        throw FormatError("model: expected " + std::to_string(expected) + " matrix rows, found " +
                          std::to_string(rows.size()));

    MLPModel model(spec);
    std::size_t r = 0;
    auto read_row = [&](auto&& dst, std::size_t row_index) {
        std::istringstream ss(rows[row_index]);
        std::string tok;
        Eigen::Index j = 0;
        while (ss >> tok) {
            if (j >= dst.size())
                throw FormatError("model: row " + std::to_string(row_index + 2) + " has more than " +
                                  std::to_string(dst.size()) + " values");
            char* end = nullptr;
            dst(j++) = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size())
                throw FormatError("model: row " + std::to_string(row_index + 2) + " has non-numeric value '" + tok +
                                  "'");
        }
        if (j != dst.size())
            throw FormatError("model: row " + std::to_string(row_index + 2) + " expected " +
                              std::to_string(dst.size()) + " values, found " + std::to_string(j));
    };
    for (Layer& layer : model.layers) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) read_row(layer.weights.row(i), r++);
        read_row(layer.bias, r++);
    }
    return model;
}

void save_model(const MLPModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_model(model, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

MLPModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_model(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace cwseg
