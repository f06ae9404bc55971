#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cwseg/random.hpp"
#include "cwseg/sampler.hpp"
#include "cwseg/synthetic.hpp"

using namespace cwseg;

namespace {

// O(N^2) reference: distance to the nearest opposite-label pixel by exhaustive scan.
int brute_opposite_distance(const GroundTruthMask& m, int x, int y) {
    int best = kNoOppositeLabel;
    for (int yy = 0; yy < m.height; ++yy)
        for (int xx = 0; xx < m.width; ++xx)
            if (m.at(xx, yy) != m.at(x, y)) best = std::min(best, std::max(std::abs(xx - x), std::abs(yy - y)));
    return best;
}

SampleCategory brute_category(const GroundTruthMask& m, int x, int y, int band) {
    const int d = brute_opposite_distance(m, x, y);
    const int f = std::min({x, y, m.width - 1 - x, m.height - 1 - y});
    if (f < band) return SampleCategory::NearFrameEdge;
    if (d == 1) return SampleCategory::Border;
    if (d <= band) return m.at(x, y) == Label::Object ? SampleCategory::NearEdgeInside : SampleCategory::NearEdgeOutside;
    return SampleCategory::Interior;
}

GroundTruthMask random_mask(Rng& rng) {
    const int w = 1 + int(rng.below(32)), h = 1 + int(rng.below(32));
    GroundTruthMask m(w, h);
    // Blobs rather than salt-and-pepper so that every category shows up.
    const int blobs = int(rng.below(4));
    for (int b = 0; b < blobs; ++b) {
        const int cx = int(rng.below(std::uint64_t(w))), cy = int(rng.below(std::uint64_t(h)));
        const int r = 1 + int(rng.below(10));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = Label::Object;
    }
    if (rng.below(4) == 0) m.at(int(rng.below(std::uint64_t(w))), int(rng.below(std::uint64_t(h)))) = Label::Object;
    return m;
}

std::vector<SourceImage> scene_sources(int count, int size) {
    std::vector<SourceImage> out;
    for (int i = 0; i < count; ++i) {
        auto s = two_texture_scene(size, std::uint64_t(100 + i));
        out.push_back({s.image, s.mask, "scene" + std::to_string(i)});
    }
    return out;
}

std::string serialize(const Dataset& ds) {
    std::ostringstream ss;
    write_dataset(ds, ss);
    return ss.str();
}

}  // namespace

TEST_CASE("categorize_pixel examples") {
    GroundTruthMask all_object(21, 21, Label::Object);
    CHECK(categorize_pixel(all_object, {10, 10}, 4) == SampleCategory::Interior);

    GroundTruthMask m(21, 21, Label::Object);
    m.at(11, 11) = Label::Background;
    CHECK(categorize_pixel(m, {10, 10}, 4) == SampleCategory::Border);
    CHECK(categorize_pixel(m, {11, 11}, 4) == SampleCategory::Border);

    GroundTruthMask split(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 10; ++x) split.at(x, y) = Label::Object;
    REQUIRE(brute_opposite_distance(split, 8, 10) == 2);
    CHECK(categorize_pixel(split, {8, 10}, 4) == SampleCategory::NearEdgeInside);
    CHECK(categorize_pixel(split, {12, 10}, 4) == SampleCategory::NearEdgeOutside);
    CHECK(categorize_pixel(split, {9, 10}, 4) == SampleCategory::Border);
    CHECK(categorize_pixel(split, {6, 10}, 4) == SampleCategory::NearEdgeInside);
    CHECK(categorize_pixel(split, {5, 10}, 4) == SampleCategory::Interior);
    CHECK(categorize_pixel(split, {4, 10}, 4) == SampleCategory::Interior);
    CHECK(categorize_pixel(split, {3, 10}, 4) == SampleCategory::NearFrameEdge);
    // Frame proximity outranks the border.
    CHECK(categorize_pixel(split, {9, 0}, 4) == SampleCategory::NearFrameEdge);

    CHECK_THROWS_AS(categorize_pixel(split, {20, 0}, 4), PreconditionError);
    CHECK_THROWS_AS(categorize_pixel(split, {0, 0}, 0), PreconditionError);
}

TEST_CASE("categorization agrees with a brute-force scan on random masks") {
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const GroundTruthMask m = random_mask(rng);
        const int band = 1 + int(rng.below(5));
        const auto dt = opposite_label_distance(m);
        for (int y = 0; y < m.height; ++y) {
            for (int x = 0; x < m.width; ++x) {
                REQUIRE(dt[std::size_t(y * m.width + x)] == brute_opposite_distance(m, x, y));
                REQUIRE(categorize_pixel(m, {x, y}, band) == brute_category(m, x, y, band));
            }
        }
    }
}

TEST_CASE("default protocol splits 1000 samples 700/300") {
    const auto sources = scene_sources(1, 64);
    const Dataset ds = sample_dataset(sources, {9, 1000, 4, 1});
    CHECK(ds.train.size() == 700);
    CHECK(ds.test.size() == 300);
    CHECK(ds.window == 9);
    CHECK(ds.train.front().features.size() == 81);
}

TEST_CASE("ten samples are five per class, split 7/3") {
    const auto sources = scene_sources(1, 32);
    const Dataset ds = sample_dataset(sources, {3, 10, 4, 9});
    std::map<Label, int> count;
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& s : *split) ++count[s.label];
    CHECK(count[Label::Object] == 5);
    CHECK(count[Label::Background] == 5);
    CHECK(ds.train.size() == 7);
    CHECK(ds.test.size() == 3);
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto sources = scene_sources(2, 40);
    const std::string a = serialize(sample_dataset(sources, {5, 300, 4, 77}));
    const std::string b = serialize(sample_dataset(sources, {5, 300, 4, 77}));
    const std::string c = serialize(sample_dataset(sources, {5, 300, 4, 78}));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("dataset invariants hold over seeds, sizes and image sets") {
    const auto sources = scene_sources(3, 40);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        for (int total : {10, 11, 99, 400, 1000}) {
            const Dataset ds = sample_dataset(sources, {5, total, 3, seed});
            REQUIRE(ds.train.size() + ds.test.size() == std::size_t(total));
            CHECK(ds.train.size() == std::size_t(total * 7 / 10));

            std::set<std::tuple<std::string, int, int>> seen;
            for (const auto* split : {&ds.train, &ds.test}) {
                int objects = 0, backgrounds = 0;
                for (const auto& s : *split) {
                    const auto it = std::find_if(sources.begin(), sources.end(),
                                                 [&](const SourceImage& src) { return src.id == s.source; });
                    REQUIRE(it != sources.end());
                    CHECK(it->mask.at(s.coord.x, s.coord.y) == s.label);
                    CHECK(categorize_pixel(it->mask, s.coord, 3) == s.category);
                    CHECK(seen.insert({s.source, s.coord.x, s.coord.y}).second);
                    (s.label == Label::Object ? objects : backgrounds) += 1;
                }
                CHECK(std::abs(objects - backgrounds) <= 1);
            }
        }
    }
}

TEST_CASE("category quotas follow the pools and missing categories backfill from interior") {
    // Single scene whose ellipse never reaches the frame: OBJECT has no
    // NEAR_FRAME_EDGE or NEAR_EDGE_OUTSIDE pixels, so both quotas move to INTERIOR.
    const auto sources = scene_sources(1, 64);
    const Dataset ds = sample_dataset(sources, {5, 1000, 4, 3});
    std::map<std::pair<Label, SampleCategory>, int> count;
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& s : *split) ++count[{s.label, s.category}];

    CHECK(count[{Label::Object, SampleCategory::NearEdgeInside}] == 100);
    CHECK(count[{Label::Object, SampleCategory::Border}] == 100);
    CHECK(count[{Label::Object, SampleCategory::Interior}] == 300);
    CHECK(count[{Label::Object, SampleCategory::NearFrameEdge}] == 0);
    CHECK(count[{Label::Background, SampleCategory::NearEdgeOutside}] == 100);
    CHECK(count[{Label::Background, SampleCategory::Border}] == 100);
    CHECK(count[{Label::Background, SampleCategory::NearFrameEdge}] == 100);
    CHECK(count[{Label::Background, SampleCategory::Interior}] == 200);
}

TEST_CASE("draws are spread evenly across source images") {
    const auto sources = scene_sources(3, 48);
    const Dataset ds = sample_dataset(sources, {5, 600, 4, 5});
    std::map<std::tuple<Label, SampleCategory, std::string>, int> count;
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& s : *split) ++count[{s.label, s.category, s.source}];
    for (Label l : {Label::Object, Label::Background}) {
        for (SampleCategory c : kAllCategories) {
            std::vector<int> per_image;
            for (const auto& src : sources) per_image.push_back(count[{l, c, src.id}]);
            const auto [lo, hi] = std::minmax_element(per_image.begin(), per_image.end());
            CHECK(*hi - *lo <= 1);
        }
    }
}

TEST_CASE("sampling errors") {
    auto scene = two_texture_scene(16, 1);
    std::vector<SourceImage> one{{scene.image, scene.mask, "a"}};
    CHECK_THROWS_AS(sample_dataset(one, {3, 300, 4, 0}), CapacityError);
    CHECK_THROWS_AS(sample_dataset(one, {3, 9, 4, 0}), PreconditionError);

    std::vector<SourceImage> no_object{{scene.image, GroundTruthMask(16, 16), "a"}};
    CHECK_THROWS_AS(sample_dataset(no_object, {3, 10, 4, 0}), LabelCoverageError);

    std::vector<SourceImage> mismatched{{scene.image, GroundTruthMask(15, 16), "a"}};
    CHECK_THROWS_AS(sample_dataset(mismatched, {3, 10, 4, 0}), PreconditionError);
    CHECK_THROWS_AS(sample_dataset(std::span<const SourceImage>(), {3, 10, 4, 0}), PreconditionError);
}

TEST_CASE("dataset text format") {
    const auto sources = scene_sources(1, 32);
    const Dataset ds = sample_dataset(sources, {3, 20, 4, 2});
    const std::string text = serialize(ds);

    std::istringstream lines(text);
    std::string meta, header;
    std::getline(lines, meta);
    std::getline(lines, header);
    CHECK(meta == "# cwseg-dataset window=3 channels=1 seed=2 train=14 test=6");
    CHECK(header == "label,category,source,x,y,f1,f2,f3,f4,f5,f6,f7,f8,f9");

    std::istringstream in(text);
    const Dataset back = read_dataset(in);
    CHECK(back.train.size() == 14);
    CHECK(back.test.size() == 6);
    CHECK(serialize(back) == text);
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
        CHECK(back.train[i].label == ds.train[i].label);
        CHECK(back.train[i].coord == ds.train[i].coord);
        for (std::size_t k = 0; k < 9; ++k)
            CHECK(back.train[i].features[k] == doctest::Approx(ds.train[i].features[k]).epsilon(1e-8));
    }

    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_dataset(truncated), FormatError);
    std::istringstream bad("label,category\n");
    CHECK_THROWS_AS(read_dataset(bad), FormatError);
}
