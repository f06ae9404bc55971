#include "cwseg/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cwseg/random.hpp"

namespace cwseg {

const char* to_string(SampleCategory c) noexcept {
    switch (c) {
        case SampleCategory::Interior: return "INTERIOR";
        case SampleCategory::NearEdgeInside: return "NEAR_EDGE_INSIDE";
        case SampleCategory::Border: return "BORDER";
        case SampleCategory::NearEdgeOutside: return "NEAR_EDGE_OUTSIDE";
        case SampleCategory::NearFrameEdge: return "NEAR_FRAME_EDGE";
    }
    return "?";
}

SampleCategory category_from_string(const std::string& s) {
    for (SampleCategory c : kAllCategories)
        if (s == to_string(c)) return c;
    throw FormatError("unknown sample category '" + s + "'");
}

SampleCategory categorize(Label label, int opposite_distance, int frame_distance, int band) {
    if (frame_distance < band) return SampleCategory::NearFrameEdge;
    if (opposite_distance == 1) return SampleCategory::Border;
    if (opposite_distance <= band)
        return label == Label::Object ? SampleCategory::NearEdgeInside : SampleCategory::NearEdgeOutside;
    return SampleCategory::Interior;
}

namespace {

int frame_distance(int width, int height, Coord c) {
    return std::min({c.x, c.y, width - 1 - c.x, height - 1 - c.y});
}

// Exact chessboard distance transform: two raster passes with unit 8-neighbour steps.
std::vector<int> chessboard_distance_to(const GroundTruthMask& mask, Label target) {
    const int w = mask.width, h = mask.height;
    constexpr int inf = kNoOppositeLabel;
    std::vector<int> d(mask.labels.size(), inf);
    auto at = [&](int x, int y) -> int& { return d[std::size_t(y) * std::size_t(w) + std::size_t(x)]; };
    auto relax = [&](int& cur, int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        const int v = at(x, y);
        if (v != inf && v + 1 < cur) cur = v + 1;
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int& cur = at(x, y);
            if (mask.at(x, y) == target) {
                cur = 0;
                continue;
            }
            relax(cur, x - 1, y);
            relax(cur, x - 1, y - 1);
            relax(cur, x, y - 1);
            relax(cur, x + 1, y - 1);
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            int& cur = at(x, y);
            relax(cur, x + 1, y);
            relax(cur, x + 1, y + 1);
            relax(cur, x, y + 1);
            relax(cur, x - 1, y + 1);
        }
    }
    return d;
}

}  // namespace

std::vector<int> opposite_label_distance(const GroundTruthMask& mask) {
    const auto to_object = chessboard_distance_to(mask, Label::Object);
    const auto to_background = chessboard_distance_to(mask, Label::Background);
    std::vector<int> d(mask.labels.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = mask.labels[i] == Label::Object ? to_background[i] : to_object[i];
    return d;
}

SampleCategory categorize_pixel(const GroundTruthMask& mask, Coord coord, int band) {
    detail::require(band >= 1, "band must be >= 1");
    detail::require(mask.contains(coord.x, coord.y),
                    "coordinate (" + std::to_string(coord.x) + "," + std::to_string(coord.y) + ") outside mask");
    const Label label = mask.at(coord.x, coord.y);

    // Only d == 1 and d <= band matter, so a local search of radius `band` suffices.
    int d = kNoOppositeLabel;
    for (int dy = -band; dy <= band; ++dy) {
        for (int dx = -band; dx <= band; ++dx) {
            const int x = coord.x + dx, y = coord.y + dy;
            if (!mask.contains(x, y) || mask.at(x, y) == label) continue;
            d = std::min(d, std::max(std::abs(dx), std::abs(dy)));
        }
    }
    return categorize(label, d, frame_distance(mask.width, mask.height, coord), band);
}

int train_count(int total) { return int((long long)total * 7 / 10); }

namespace {

struct Candidate {
    std::size_t image;
    Coord coord;
};

constexpr std::size_t kCategoryCount = kAllCategories.size();

// pools[category][image] -> coordinates of one class
using ClassPools = std::array<std::vector<std::vector<Coord>>, kCategoryCount>;

std::array<std::size_t, kCategoryCount> allot_quotas(std::size_t wanted,
                                                    const std::array<std::size_t, kCategoryCount>& available) {
    std::array<std::size_t, kCategoryCount> take{};
    std::size_t deficit = 0;
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
        const std::size_t quota = wanted / kCategoryCount + (k < wanted % kCategoryCount ? 1 : 0);
        take[k] = std::min(quota, available[k]);
        deficit += quota - take[k];
    }
    const std::size_t interior = std::size_t(SampleCategory::Interior);
    const std::size_t extra = std::min(deficit, available[interior] - take[interior]);
    take[interior] += extra;
    deficit -= extra;
    // Interior exhausted as well: spread what is left over any category with spare pixels.
    while (deficit > 0) {
        bool progressed = false;
        for (std::size_t k = 0; k < kCategoryCount && deficit > 0; ++k) {
            if (take[k] < available[k]) {
                ++take[k];
                --deficit;
                progressed = true;
            }
        }
        if (!progressed) throw CapacityError("not enough pixels to fill category quotas");
    }
    return take;
}

// Round-robin over source images so each category's draw is spread across them.
std::vector<Candidate> draw_across_images(std::vector<std::vector<Coord>>& per_image, std::size_t count, Rng& rng) {
    for (auto& pool : per_image) rng.shuffle(std::span<Coord>(pool));
    std::vector<std::size_t> next(per_image.size(), 0);
    std::vector<Candidate> out;
    out.reserve(count);
    while (out.size() < count) {
        for (std::size_t i = 0; i < per_image.size() && out.size() < count; ++i) {
            if (next[i] < per_image[i].size()) out.push_back({i, per_image[i][next[i]++]});
        }
    }
    return out;
}

bool valid_source_id(const std::string& id) {
    return !id.empty() && id.find_first_of(",\n\r") == std::string::npos;
}

}  // namespace

Dataset sample_dataset(std::span<const SourceImage> images, const SamplingConfig& config) {
    detail::require(!images.empty(), "sample_dataset needs at least one image");
    detail::require(config.total >= 10, "total samples must be >= 10");
    detail::require(config.band >= 1, "band must be >= 1");
    detail::require(config.window >= 3 && config.window % 2 == 1, "window must be odd and >= 3");

    const int channels = images.front().image.channels;
    std::set<std::string> ids;
    for (const auto& src : images) {
        detail::require(src.image.width == src.mask.width && src.image.height == src.mask.height,
                        "mask dimensions do not match image '" + src.id + "'");
        detail::require(src.image.channels == channels, "all images must share the same channel count");
        detail::require(valid_source_id(src.id), "invalid source id '" + src.id + "'");
        detail::require(ids.insert(src.id).second, "duplicate source id '" + src.id + "'");
    }

    std::array<ClassPools, 2> pools;
    for (auto& cls : pools)
        for (auto& cat : cls) cat.resize(images.size());
    std::array<std::size_t, 2> class_size{};
    std::size_t pixel_total = 0;

    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& mask = images[i].mask;
        const auto distance = opposite_label_distance(mask);
        pixel_total += mask.labels.size();
        for (int y = 0; y < mask.height; ++y) {
            for (int x = 0; x < mask.width; ++x) {
                const std::size_t idx = std::size_t(y) * std::size_t(mask.width) + std::size_t(x);
                const Label label = mask.labels[idx];
                const SampleCategory cat =
                    categorize(label, distance[idx], frame_distance(mask.width, mask.height, {x, y}), config.band);
                pools[std::size_t(label)][std::size_t(cat)][i].push_back({x, y});
                ++class_size[std::size_t(label)];
            }
        }
    }

    if (class_size[std::size_t(Label::Object)] == 0)
        throw LabelCoverageError("no OBJECT pixels in any mask");
    if (class_size[std::size_t(Label::Background)] == 0)
        throw LabelCoverageError("no BACKGROUND pixels in any mask");

    const std::size_t total = std::size_t(config.total);
    if (total > pixel_total)
        throw CapacityError("requested " + std::to_string(total) + " samples but only " +
                            std::to_string(pixel_total) + " pixels are available");
    std::array<std::size_t, 2> wanted{};
    wanted[std::size_t(Label::Object)] = total - total / 2;
    wanted[std::size_t(Label::Background)] = total / 2;
    for (Label label : {Label::Object, Label::Background}) {
        const std::size_t l = std::size_t(label);
        if (wanted[l] > class_size[l])
            throw CapacityError("class " + std::string(to_string(label)) + " needs " + std::to_string(wanted[l]) +
                                " samples but only " + std::to_string(class_size[l]) + " pixels are available");
    }

    Rng rng(config.seed);
    Dataset ds;
    ds.seed = config.seed;
    ds.window = config.window;
    ds.channels = channels;
    const int width = window_length(config.window, channels);

    std::array<std::vector<LabeledSample>, 2> by_class;
    for (Label label : {Label::Object, Label::Background}) {
        const std::size_t l = std::size_t(label);
        std::array<std::size_t, kCategoryCount> available{};
        for (std::size_t k = 0; k < kCategoryCount; ++k)
            for (const auto& pool : pools[l][k]) available[k] += pool.size();
        const auto take = allot_quotas(wanted[l], available);

        for (std::size_t k = 0; k < kCategoryCount; ++k) {
            for (const Candidate& c : draw_across_images(pools[l][k], take[k], rng)) {
                LabeledSample s;
                s.features.resize(std::size_t(width));
                extract_features(images[c.image].image, c.coord, config.window, s.features);
                s.label = label;
                s.category = kAllCategories[k];
                s.source = images[c.image].id;
                s.coord = c.coord;
                by_class[l].push_back(std::move(s));
            }
        }
        rng.shuffle(std::span<LabeledSample>(by_class[l]));
    }

    auto& objects = by_class[std::size_t(Label::Object)];
    auto& backgrounds = by_class[std::size_t(Label::Background)];
    const std::size_t n_train = std::size_t(train_count(config.total));
    std::size_t train_objects = n_train / 2;
    if (n_train % 2 == 1 && objects.size() >= backgrounds.size()) ++train_objects;
    const std::size_t train_backgrounds = n_train - train_objects;

    auto move_range = [](std::vector<LabeledSample>& from, std::size_t begin, std::size_t end,
                         std::vector<LabeledSample>& to) {
        for (std::size_t i = begin; i < end; ++i) to.push_back(std::move(from[i]));
    };
    move_range(objects, 0, train_objects, ds.train);
    move_range(backgrounds, 0, train_backgrounds, ds.train);
    move_range(objects, train_objects, objects.size(), ds.test);
    move_range(backgrounds, train_backgrounds, backgrounds.size(), ds.test);
    rng.shuffle(std::span<LabeledSample>(ds.train));
    rng.shuffle(std::span<LabeledSample>(ds.test));
    return ds;
}

namespace {

constexpr const char* kDatasetMagic = "# cwseg-dataset";

void write_row(std::ostream& out, const LabeledSample& s) {
    out << to_string(s.label) << ',' << to_string(s.category) << ',' << s.source << ',' << s.coord.x << ','
        << s.coord.y;
    char buf[32];
    for (double f : s.features) {
        std::snprintf(buf, sizeof buf, "%.9g", f);
        out << ',' << buf;
    }
    out << '\n';
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        parts.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return parts;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
    T value{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) throw FormatError("dataset: bad " + what + " '" + s + "'");
    return value;
}

double parse_double(const std::string& s, const std::string& what) {
    // from_chars for floating point is incomplete on some toolchains; strtod is exact for %.9g output.
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw FormatError("dataset: bad " + what + " '" + s + "'");
    return v;
}

std::map<std::string, std::string> parse_meta(const std::string& line) {
    std::map<std::string, std::string> meta;
    std::istringstream ss(line.substr(std::string(kDatasetMagic).size()));
    std::string kv;
    while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw FormatError("dataset: bad metadata token '" + kv + "'");
        meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const char* key : {"window", "channels", "seed", "train", "test"})
        if (!meta.count(key)) throw FormatError(std::string("dataset: metadata missing '") + key + "'");
    return meta;
}

}  // namespace

void write_dataset(const Dataset& dataset, std::ostream& out) {
    const int width = dataset.feature_width();
    out << kDatasetMagic << " window=" << dataset.window << " channels=" << dataset.channels
        << " seed=" << dataset.seed << " train=" << dataset.train.size() << " test=" << dataset.test.size() << '\n';
    out << "label,category,source,x,y";
    for (int k = 1; k <= width; ++k) out << ",f" << k;
    out << '\n';
    for (const auto* split : {&dataset.train, &dataset.test}) {
        for (const auto& s : *split) {
            detail::require(s.features.size() == std::size_t(width), "sample feature width mismatch");
            write_row(out, s);
        }
    }
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kDatasetMagic, 0) != 0)
        throw FormatError("dataset: missing '# cwseg-dataset' metadata line");
    const auto meta = parse_meta(line);

    Dataset ds;
    ds.window = parse_number<int>(meta.at("window"), "window");
    ds.channels = parse_number<int>(meta.at("channels"), "channels");
    ds.seed = parse_number<std::uint64_t>(meta.at("seed"), "seed");
    const auto n_train = parse_number<std::size_t>(meta.at("train"), "train");
    const auto n_test = parse_number<std::size_t>(meta.at("test"), "test");
    if (ds.window < 3 || ds.window % 2 == 0 || (ds.channels != 1 && ds.channels != 3))
        throw FormatError("dataset: invalid window/channels metadata");
    const std::size_t width = std::size_t(ds.feature_width());

    if (!std::getline(in, line) || line.rfind("label,category,source,x,y", 0) != 0)
        throw FormatError("dataset: missing column header");
    if (split_commas(line).size() != 5 + width)
        throw FormatError("dataset: header declares wrong feature count for window " + std::to_string(ds.window));

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto parts = split_commas(line);
        if (parts.size() != 5 + width)
            throw FormatError("dataset row " + std::to_string(row) + ": expected " + std::to_string(5 + width) +
                              " fields, found " + std::to_string(parts.size()));
        LabeledSample s;
        s.label = label_from_string(parts[0]);
        s.category = category_from_string(parts[1]);
        s.source = parts[2];
        s.coord = {parse_number<int>(parts[3], "x"), parse_number<int>(parts[4], "y")};
        s.features.resize(width);
        for (std::size_t k = 0; k < width; ++k) s.features[k] = parse_double(parts[5 + k], "feature");
        (ds.train.size() < n_train ? ds.train : ds.test).push_back(std::move(s));
    }
    if (ds.train.size() != n_train || ds.test.size() != n_test)
        throw FormatError("dataset: expected " + std::to_string(n_train + n_test) + " rows, found " +
                          std::to_string(row));
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_dataset(dataset, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_dataset(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace cwseg
