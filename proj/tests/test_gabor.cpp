#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cwseg/eval.hpp"
#include "cwseg/gabor.hpp"
#include "cwseg/random.hpp"
#include "cwseg/synthetic.hpp"

using namespace cwseg;

TEST_CASE("default bank") {
    const auto bank = filter_bank(GaborSpec{});
    REQUIRE(bank.size() == 8);
    CHECK(bank[0].frequency == 0.125);
    CHECK(bank[0].sigma == doctest::Approx(4.48));
    CHECK(bank[0].radius == 14);
    CHECK(bank[4].frequency == 0.25);
    CHECK(bank[4].sigma == doctest::Approx(2.24));
    CHECK(bank[4].radius == 7);
}

TEST_CASE("spec validation") {
    GaborSpec s;
    s.frequencies = {0.5};
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    s.frequencies = {0.0};
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    s = GaborSpec{};
    s.orientations_deg = {0.0, 180.0};
    CHECK_THROWS_AS(s.validate(), PreconditionError);
}

TEST_CASE("kernel at 0 degrees is symmetric in y, and every kernel sums to zero") {
    const Kernel k = gabor_kernel({0.0, 0.25, 2.24, 7});
    for (int y = -7; y <= 7; ++y)
        for (int x = -7; x <= 7; ++x) CHECK(k.at(x, y) == doctest::Approx(k.at(x, -y)));
    for (double theta : {0.0, 45.0, 90.0, 135.0}) {
        for (double f : {0.125, 0.25}) {
            const Kernel kk = gabor_kernel({theta, f, 0.56 / f, int(std::ceil(3 * 0.56 / f))});
            double sum = 0.0, scale = 0.0;
            for (double v : kk.values) sum += v, scale += std::fabs(v);
            CHECK(std::fabs(sum) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("7x7 kernel centre equals 1 minus the raw kernel mean") {
    const GaborFilter f{30.0, 0.2, 1.5, 3};
    // Independent evaluation of the uncorrected kernel over the 7x7 grid.
    const double t = 30.0 * M_PI / 180.0;
    double raw_sum = 0.0;
    for (int y = -3; y <= 3; ++y)
        for (int x = -3; x <= 3; ++x) {
            const double xr = x * std::cos(t) + y * std::sin(t), yr = -x * std::sin(t) + y * std::cos(t);
            raw_sum += std::exp(-(xr * xr + yr * yr) / (2 * 1.5 * 1.5)) * std::cos(2 * M_PI * 0.2 * xr);
        }
    const Kernel k = gabor_kernel(f);
    CHECK(k.side() == 7);
    CHECK(k.at(0, 0) == doctest::Approx(1.0 - raw_sum / 49.0).epsilon(1e-13));
}

TEST_CASE("filter responses to constant images are exactly zero") {
    for (int v : {0, 17, 128, 255}) {
        RasterImage img(33, 21, 1, std::uint8_t(v));
        for (const auto& f : filter_bank(GaborSpec{})) {
            for (double r : filter_response(img, gabor_kernel(f))) REQUIRE(r == 0.0);
        }
    }
}

TEST_CASE("response equals plain correlation with replicate padding") {
    Rng rng(4);
    RasterImage img(20, 15, 1);
    for (auto& v : img.data) v = std::uint8_t(rng.below(256));
    const Kernel k = gabor_kernel({45.0, 0.25, 2.24, 4});
    const auto resp = filter_response(img, k);
    for (int y = 0; y < img.height; y += 3) {
        for (int x = 0; x < img.width; x += 2) {
            double acc = 0.0;
            for (int dy = -4; dy <= 4; ++dy)
                for (int dx = -4; dx <= 4; ++dx)
                    acc += k.at(dx, dy) * img.at(std::clamp(x + dx, 0, 19), std::clamp(y + dy, 0, 14));
            CHECK(resp[std::size_t(y * 20 + x)] == doctest::Approx(acc).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("gaussian smoothing preserves constants") {
    std::vector<double> field(12 * 9, 3.25);
    for (double v : gaussian_smooth(field, 12, 9, 2.0)) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("constant image segments to a single label with a degenerate status") {
    const GaborSegmentation seg = segment_gabor(RasterImage(40, 30, 1, 90), GaborSpec{});
    CHECK(seg.status == GaborStatus::Degenerate);
    for (Label l : seg.labels.labels) CHECK(l == Label::Background);
}

TEST_CASE("stripes vs uniform recovers the layout") {
    const SyntheticScene scene = stripes_vs_uniform(128, 128, 4);
    const GaborSegmentation seg = segment_gabor(scene.image, GaborSpec{});
    CHECK(seg.status == GaborStatus::Ok);
    CHECK(pixel_accuracy(seg.labels, scene.mask).efficiency() >= 90.0);
    for (std::size_t i = 1; i < seg.objective.size(); ++i)
        CHECK(seg.objective[i] <= seg.objective[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("segmentation is deterministic and shift invariant") {
    const SyntheticScene scene = stripes_vs_uniform(64, 48, 4);
    const GaborSegmentation a = segment_gabor(scene.image, GaborSpec{});
    const GaborSegmentation b = segment_gabor(scene.image, GaborSpec{});
    CHECK(a.labels == b.labels);

    RasterImage shifted = scene.image;
    for (auto& v : shifted.data) v = std::uint8_t(v - 40);  // stripes span 48..208, so no wrap-around
    CHECK(segment_gabor(shifted, GaborSpec{}).labels == a.labels);
}

TEST_CASE("two-means objective is non-increasing on random point clouds") {
    Rng rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t dim = 1 + std::size_t(rng.below(4));
        const std::size_t n = 5 + std::size_t(rng.below(300));
        std::vector<double> pts(n * dim);
        for (double& v : pts) v = rng.normal() + (rng.below(3) == 0 ? 2.0 : 0.0);
        const TwoMeansResult r = two_means(pts, dim, std::uint64_t(trial), 100);
        REQUIRE(!r.objective.empty());
        for (std::size_t i = 1; i < r.objective.size(); ++i)
            CHECK(r.objective[i] <= r.objective[i - 1] * (1.0 + 1e-12));
        CHECK(r.iterations <= 100);
    }
}

TEST_CASE("two-means on identical points is degenerate") {
    std::vector<double> pts(30, 1.5);
    const TwoMeansResult r = two_means(pts, 3, 0, 100);
    CHECK(r.degenerate);
}
