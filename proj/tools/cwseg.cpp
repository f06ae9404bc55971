// cwseg: object/background segmentation from pixel context windows.
//
// Subcommands: gray, synth, sample, train, segment, eval.
// Exit codes: 0 ok, 2 bad input, 3 not enough labeled pixels, 4 training did not converge.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cwseg/eval.hpp"
#include "cwseg/gabor.hpp"
#include "cwseg/image_io.hpp"
#include "cwseg/mlp.hpp"
#include "cwseg/nn_baseline.hpp"
#include "cwseg/sampler.hpp"
#include "cwseg/synthetic.hpp"

namespace {

using namespace cwseg;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNoConvergence = 4;

struct UsageError : Error {
    using Error::Error;
};

struct GrayArgs {
    std::string in, out;
};

struct SynthArgs {
    std::string scene = "two-texture";
    int size = 128;
    int period = 4;
    std::uint64_t seed = 0;
    std::string out;
};

struct SampleArgs {
    std::vector<std::string> images, masks;
    int window = 9;
    int total = 1000;
    int band = 4;
    std::uint64_t seed = 0;
    std::string out;
};

struct TrainArgs {
    std::string dataset;
    std::string layers;
    int max_epochs = 200;
    double mse_goal = 1e-3;
    std::uint64_t seed = 0;
    std::string out, log;
};

struct SegmentArgs {
    std::string model, dataset, image, truth;
    std::optional<int> window;
    std::string kind = "mlp";
    GaborSpec gabor;
    std::optional<double> gabor_sigma;
    std::string out;
};

struct EvalArgs {
    std::string model, dataset;
    std::string kind = "mlp";
};

int window_for_width(int width, int channels) {
    const int side = int(std::lround(std::sqrt(double(width) / channels)));
    if (side * side * channels != width || side % 2 == 0)
        throw UsageError("feature width " + std::to_string(width) + " does not match a " + std::to_string(channels) +
                         "-channel odd window");
    return side;
}

std::unique_ptr<Classifier> load_classifier(const std::string& kind, const std::string& model_path,
                                            const std::string& dataset_path) {
    if (kind == "mlp") {
        if (model_path.empty()) throw UsageError("--kind mlp needs --model");
        return std::make_unique<MLPClassifier>(load_model(model_path));
    }
    if (kind == "nn") {
        if (dataset_path.empty()) throw UsageError("--kind nn needs --dataset");
        return std::make_unique<NNClassifier>(NNModel::from_samples(load_dataset(dataset_path).train));
    }
    throw UsageError("unknown classifier kind '" + kind + "'");
}

int run_gray(const GrayArgs& a) {
    const RasterImage in = read_image(a.in);
    if (in.channels != 3) throw FormatError("magic: gray expects a P6 image");
    write_image(rgb_to_gray(in), a.out);
    return kExitOk;
}

int run_synth(const SynthArgs& a) {
    SyntheticScene scene;
    if (a.scene == "two-texture")
        scene = two_texture_scene(a.size, a.seed);
    else if (a.scene == "stripes")
        scene = stripes_vs_uniform(a.size, a.size, a.period);
    else
        throw UsageError("unknown scene '" + a.scene + "'");
    write_image(scene.image, a.out + ".pgm");
    write_mask(scene.mask, a.out + "_mask.pgm");
    return kExitOk;
}

int run_sample(const SampleArgs& a) {
    if (a.images.size() != a.masks.size())
        throw UsageError("got " + std::to_string(a.images.size()) + " images but " + std::to_string(a.masks.size()) +
                         " masks");
    std::vector<SourceImage> sources;
    for (std::size_t i = 0; i < a.images.size(); ++i)
        sources.push_back({read_image(a.images[i]), read_mask(a.masks[i]), a.images[i]});
    SamplingConfig cfg;
    cfg.window = a.window;
    cfg.total = a.total;
    cfg.band = a.band;
    cfg.seed = a.seed;
    save_dataset(sample_dataset(sources, cfg), a.out);
    return kExitOk;
}

int run_train(const TrainArgs& a) {
    const Dataset data = load_dataset(a.dataset);
    const LayerSpec spec = a.layers.empty() ? LayerSpec::with_input(data.feature_width()) : LayerSpec::parse(a.layers);
    if (spec.input_width() != data.feature_width())
        throw UsageError("layers expect " + std::to_string(spec.input_width()) + " inputs but the dataset has " +
                         std::to_string(data.feature_width()));
    TrainConfig cfg;
    cfg.max_epochs = a.max_epochs;
    cfg.mse_goal = a.mse_goal;
    cfg.seed = a.seed;
    const TrainResult fit = train_lm(init_weights(spec, a.seed), data, cfg);

    save_model(fit.model, a.out);
    const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw IoError("cannot write " + log_path);
    write_train_log(fit.log, log);
    if (!log) throw IoError("failed writing " + log_path);

    std::fprintf(stderr, "%s after %d epochs, mse %.6g\n", to_string(fit.status), fit.epochs, fit.history.back());
    return fit.converged() ? kExitOk : kExitNoConvergence;
}

int run_segment(const SegmentArgs& a) {
    const RasterImage image = read_image(a.image);
    SegmentationOutput out;
    if (a.kind == "gabor") {
        // Unsupervised: any model or dataset argument is ignored.
        GaborSpec spec = a.gabor;
        if (a.gabor_sigma) spec.sigma = a.gabor_sigma;
        const GaborSegmentation seg = segment_gabor(to_gray(image), spec);
        if (seg.status == GaborStatus::Degenerate) std::fprintf(stderr, "gabor: degenerate image, all background\n");
        out.mask = mask_to_image(seg.labels);
        out.gray = masked_gray(image, seg.labels);
    } else {
        const auto clf = load_classifier(a.kind, a.model, a.dataset);
        const int window = a.window.value_or(window_for_width(clf->feature_width(), image.channels));
        out = segment_image(*clf, image, window);
    }
    write_image(out.mask, a.out + "_mask.pgm");
    write_image(out.gray, a.out + "_gray.pgm");
    if (!a.truth.empty()) std::cout << pixel_accuracy(out.mask, read_mask(a.truth)).line() << '\n';
    return kExitOk;
}

int run_eval(const EvalArgs& a) {
    if (a.dataset.empty()) throw UsageError("eval needs --dataset");
    const Dataset data = load_dataset(a.dataset);
    const auto clf = load_classifier(a.kind, a.model, a.dataset);
    std::cout << evaluate(*clf, data.train, Split::Train).line() << '\n';
    std::cout << evaluate(*clf, data.test, Split::Test).line() << '\n';
    return kExitOk;
}

// Turns `key=value` lines from a config file into flags for the chosen subcommand.
// Keys whose flag also appears on the command line are skipped, so flags win.
std::vector<std::string> config_arguments(const std::string& path, const std::vector<std::string>& cli_args) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    auto given = [&](const std::string& flag) {
        for (const auto& arg : cli_args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> out;
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
        if (!item.parents.empty() || item.name == "++" || item.name == "--") continue;
        const std::string flag = "--" + item.name;
        if (given(flag)) continue;
        for (const auto& value : item.inputs) {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Object/background segmentation from pixel context windows", "cwseg"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    std::string config;
    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "key=value file; command-line flags take precedence");
    };

    GrayArgs gray;
    auto* g = app.add_subcommand("gray", "Convert a P6 color image to P5 gray");
    g->add_option("--in", gray.in)->required();
    g->add_option("--out", gray.out)->required();

    SynthArgs synth;
    auto* sy = app.add_subcommand("synth", "Write a synthetic scene as <out>.pgm and <out>_mask.pgm");
    sy->add_option("--scene", synth.scene)->check(CLI::IsMember({"two-texture", "stripes"}));
    sy->add_option("--size", synth.size);
    sy->add_option("--period", synth.period);
    sy->add_option("--seed", synth.seed);
    sy->add_option("--out", synth.out)->required();

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Draw a balanced labeled dataset of context windows");
    add_config(s);
    s->add_option("--image", sample.images, "image file (repeat; pairs with --mask)");
    s->add_option("--mask", sample.masks, "0/255 mask file (repeat)");
    s->add_option("--window", sample.window);
    s->add_option("--total", sample.total);
    s->add_option("--band", sample.band);
    s->add_option("--seed", sample.seed);
    s->add_option("--out", sample.out);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train the network with Levenberg-Marquardt");
    add_config(t);
    t->add_option("--dataset", train.dataset);
    t->add_option("--layers", train.layers, "a,b,c,d; default 18,10,2 hidden/output on the dataset width");
    t->add_option("--max-epochs", train.max_epochs);
    t->add_option("--mse-goal", train.mse_goal);
    t->add_option("--seed", train.seed);
    t->add_option("--out", train.out, "model file");
    t->add_option("--log", train.log, "training log; default <out>.log.csv");

    SegmentArgs seg;
    auto* sg = app.add_subcommand("segment", "Segment an image into <out>_mask.pgm and <out>_gray.pgm");
    add_config(sg);
    sg->add_option("--kind", seg.kind)->check(CLI::IsMember({"mlp", "nn", "gabor"}));
    sg->add_option("--model", seg.model);
    sg->add_option("--dataset", seg.dataset, "stored samples for --kind nn");
    sg->add_option("--image", seg.image);
    sg->add_option("--truth", seg.truth, "ground-truth mask; prints whole-image accuracy");
    sg->add_option("--window", seg.window);
    sg->add_option("--seed", seg.gabor.seed, "Gabor clustering seed");
    sg->add_option("--orientations", seg.gabor.orientations_deg, "Gabor orientations in degrees")->delimiter(',');
    sg->add_option("--frequencies", seg.gabor.frequencies, "Gabor frequencies in cycles per pixel")->delimiter(',');
    sg->add_option("--gabor-sigma", seg.gabor_sigma, "Gabor envelope std; default 0.56 / frequency");
    sg->add_option("--alpha", seg.gabor.nonlinearity, "energy nonlinearity |tanh(alpha r)|");
    sg->add_option("--smoothing", seg.gabor.smoothing_factor, "energy smoothing std as a multiple of sigma");
    sg->add_option("--max-iterations", seg.gabor.max_iterations, "2-means iteration cap");
    sg->add_option("--out", seg.out);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Print train and test efficiency lines");
    add_config(e);
    e->add_option("--kind", ev.kind)->check(CLI::IsMember({"mlp", "nn"}));
    e->add_option("--model", ev.model);
    e->add_option("--dataset", ev.dataset);

    std::vector<std::string> args(argv + 1, argv + argc);
    // Splice config-file flags in right after the subcommand name.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        const auto extra = config_arguments(args[i + 1], args);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitInput;
    }

    const auto need = [](const std::string& value, const char* flag) {
        if (value.empty()) throw UsageError(std::string("missing ") + flag);
    };
    if (g->parsed()) return run_gray(gray);
    if (sy->parsed()) return run_synth(synth);
    if (s->parsed()) {
        need(sample.out, "--out");
        return run_sample(sample);
    }
    if (t->parsed()) {
        need(train.dataset, "--dataset");
        need(train.out, "--out");
        return run_train(train);
    }
    if (sg->parsed()) {
        need(seg.image, "--image");
        need(seg.out, "--out");
        return run_segment(seg);
    }
    return run_eval(ev);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cwseg::CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const cwseg::LabelCoverageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
