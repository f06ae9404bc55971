#include "cwseg/gabor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "cwseg/random.hpp"

namespace cwseg {

void GaborSpec::validate() const {
    detail::require(!orientations_deg.empty() && !frequencies.empty(), "Gabor bank needs orientations and frequencies");
    for (double f : frequencies) detail::require(f > 0.0 && f < 0.5, "Gabor frequency must lie in (0, 0.5)");
    for (std::size_t i = 0; i < orientations_deg.size(); ++i) {
        for (std::size_t j = i + 1; j < orientations_deg.size(); ++j) {
            const double diff = std::fmod(std::fabs(orientations_deg[i] - orientations_deg[j]), 180.0);
            detail::require(diff > 1e-9 && 180.0 - diff > 1e-9, "Gabor orientations must be distinct mod 180");
        }
    }
    if (sigma) detail::require(*sigma > 0.0, "Gabor sigma must be > 0");
    if (kernel_radius) detail::require(*kernel_radius >= 1, "Gabor kernel radius must be >= 1");
    detail::require(nonlinearity > 0.0 && smoothing_factor > 0.0, "Gabor nonlinearity and smoothing must be > 0");
    detail::require(max_iterations >= 1, "max_iterations must be >= 1");
}

std::vector<GaborFilter> filter_bank(const GaborSpec& spec) {
    spec.validate();
    std::vector<GaborFilter> bank;
    for (double f : spec.frequencies) {
        const double sigma = spec.sigma.value_or(0.56 / f);
        const int radius = spec.kernel_radius.value_or(int(std::ceil(3.0 * sigma)));
        for (double theta : spec.orientations_deg) bank.push_back({theta, f, sigma, radius});
    }
    return bank;
}

Kernel gabor_kernel(const GaborFilter& filter) {
    detail::require(filter.radius >= 1 && filter.sigma > 0.0, "invalid Gabor filter");
    Kernel k;
    k.radius = filter.radius;
    k.values.resize(std::size_t(k.side()) * std::size_t(k.side()));
    const double theta = filter.orientation_deg * M_PI / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double two_sigma2 = 2.0 * filter.sigma * filter.sigma;
    double sum = 0.0;
    std::size_t i = 0;
    for (int y = -k.radius; y <= k.radius; ++y) {
        for (int x = -k.radius; x <= k.radius; ++x) {
            const double xr = x * c + y * s;
            const double yr = -x * s + y * c;
            const double v = std::exp(-(xr * xr + yr * yr) / two_sigma2) * std::cos(2.0 * M_PI * filter.frequency * xr);
            k.values[i++] = v;
            sum += v;
        }
    }
    const double mean = sum / double(k.values.size());
    for (double& v : k.values) v -= mean;
    return k;
}

std::vector<double> filter_response(const RasterImage& gray, const Kernel& kernel) {
    detail::require(gray.channels == 1, "Gabor filtering needs a gray image");
    const int w = gray.width, h = gray.height, r = kernel.radius;
    std::vector<double> out(gray.pixel_count());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int center = gray.at(x, y);
            double acc = 0.0;
            std::size_t i = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -r; dx <= r; ++dx, ++i) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    acc += kernel.values[i] * double(int(gray.at(xx, yy)) - center);
                }
            }
            out[std::size_t(y) * std::size_t(w) + std::size_t(x)] = acc;
        }
    }
    return out;
}

std::vector<double> gaussian_smooth(std::span<const double> field, int width, int height, double sigma) {
    detail::require(field.size() == std::size_t(width) * std::size_t(height), "field size mismatch");
    detail::require(sigma > 0.0, "smoothing sigma must be > 0");
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
    double norm = 0.0;
    for (int d = -r; d <= r; ++d) norm += taps[std::size_t(d + r)] = std::exp(-double(d * d) / (2.0 * sigma * sigma));
    for (double& t : taps) t /= norm;

    std::vector<double> tmp(field.size()), out(field.size());
    for (int y = 0; y < height; ++y) {
        const std::size_t row = std::size_t(y) * std::size_t(width);
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += taps[std::size_t(d + r)] * field[row + std::size_t(std::clamp(x + d, 0, width - 1))];
            tmp[row + std::size_t(x)] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d)
                acc += taps[std::size_t(d + r)] * tmp[std::size_t(std::clamp(y + d, 0, height - 1)) * std::size_t(width) + std::size_t(x)];
            out[std::size_t(y) * std::size_t(width) + std::size_t(x)] = acc;
        }
    }
    return out;
}

FeatureStack gabor_features(const RasterImage& gray, const GaborSpec& spec) {
    detail::require(gray.channels == 1, "Gabor segmentation needs a gray image");
    const auto bank = filter_bank(spec);
    FeatureStack stack;
    stack.width = gray.width;
    stack.height = gray.height;
    stack.channels = int(bank.size());
    const std::size_t n = gray.pixel_count();
    stack.data.assign(n * bank.size(), 0.0);

    for (std::size_t c = 0; c < bank.size(); ++c) {
        std::vector<double> response = filter_response(gray, gabor_kernel(bank[c]));
        for (double& v : response) v = std::fabs(std::tanh(spec.nonlinearity * v));
        const auto smoothed = gaussian_smooth(response, gray.width, gray.height, spec.smoothing_factor * bank[c].sigma);
        for (std::size_t p = 0; p < n; ++p) stack.data[p * bank.size() + c] = smoothed[p];
    }
    return stack;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return d2;
}

}  // namespace

TwoMeansResult two_means(std::span<const double> points, std::size_t dim, std::uint64_t seed, int max_iterations) {
    detail::require(dim >= 1 && !points.empty() && points.size() % dim == 0, "two_means: bad point buffer");
    detail::require(max_iterations >= 1, "two_means: max_iterations must be >= 1");
    const std::size_t n = points.size() / dim;
    auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };

    TwoMeansResult result;
    result.assignment.assign(n, 0);

    Rng rng(seed);
    const std::size_t first = std::size_t(rng.below(n));
    std::size_t second = first;
    double far = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = squared_distance(point(i), point(first));
        if (d2 > far) {
            far = d2;
            second = i;
        }
    }
    if (far == 0.0) {
        result.degenerate = true;
        result.objective.push_back(0.0);
        return result;
    }

    std::array<std::vector<double>, 2> centers{std::vector<double>(point(first).begin(), point(first).end()),
                                               std::vector<double>(point(second).begin(), point(second).end())};
    for (int it = 1; it <= max_iterations; ++it) {
        bool changed = false;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = squared_distance(point(i), centers[0]);
            const double d1 = squared_distance(point(i), centers[1]);
            // Ties keep the current assignment, so the iteration cannot cycle.
            std::uint8_t a = result.assignment[i];
            if (d0 < d1) a = 0;
            else if (d1 < d0) a = 1;
            objective += a == 0 ? d0 : d1;
            if (a != result.assignment[i]) changed = true;
            result.assignment[i] = a;
        }
        result.objective.push_back(objective);
        result.iterations = it;
        // The first pass starts from a placeholder assignment, so it never counts as converged.
        if (!changed && it > 1) break;

        std::array<std::vector<double>, 2> sums{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
        std::array<std::size_t, 2> counts{};
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = point(i);
            auto& s = sums[result.assignment[i]];
            for (std::size_t k = 0; k < dim; ++k) s[k] += p[k];
            ++counts[result.assignment[i]];
        }
        for (std::size_t c = 0; c < 2; ++c) {
            if (counts[c] == 0) continue;  // an emptied cluster keeps its old centre
            for (std::size_t k = 0; k < dim; ++k) centers[c][k] = sums[c][k] / double(counts[c]);
        }
    }
    return result;
}

GaborSegmentation segment_gabor(const RasterImage& gray, const GaborSpec& spec) {
    const FeatureStack stack = gabor_features(gray, spec);
    const std::size_t n = gray.pixel_count();
    const std::size_t dim = std::size_t(stack.channels);

    GaborSegmentation out;
    out.labels = GroundTruthMask(gray.width, gray.height, Label::Background);

    std::vector<double> standardized(stack.data.size(), 0.0);
    bool any_variance = false;
    for (std::size_t c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (std::size_t p = 0; p < n; ++p) mean += stack.at(p, int(c));
        mean /= double(n);
        double var = 0.0;
        for (std::size_t p = 0; p < n; ++p) var += (stack.at(p, int(c)) - mean) * (stack.at(p, int(c)) - mean);
        var /= double(n);
        if (!(var > 0.0)) continue;
        any_variance = true;
        const double inv_sd = 1.0 / std::sqrt(var);
        for (std::size_t p = 0; p < n; ++p) standardized[p * dim + c] = (stack.at(p, int(c)) - mean) * inv_sd;
    }
    if (!any_variance) {
        out.status = GaborStatus::Degenerate;
        return out;
    }

    const TwoMeansResult km = two_means(standardized, dim, spec.seed, spec.max_iterations);
    out.objective = km.objective;
    out.iterations = km.iterations;
    if (km.degenerate) {
        out.status = GaborStatus::Degenerate;
        return out;
    }

    std::array<double, 2> energy{};
    std::array<std::size_t, 2> counts{};
    for (std::size_t p = 0; p < n; ++p) {
        double e = 0.0;
        for (std::size_t c = 0; c < dim; ++c) e += stack.at(p, int(c));
        energy[km.assignment[p]] += e;
        ++counts[km.assignment[p]];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        out.status = GaborStatus::Degenerate;
        return out;
    }
    const std::uint8_t object_cluster = energy[1] / double(counts[1]) > energy[0] / double(counts[0]) ? 1 : 0;
    for (std::size_t p = 0; p < n; ++p)
        out.labels.labels[p] = km.assignment[p] == object_cluster ? Label::Object : Label::Background;
    return out;
}

}  // namespace cwseg
