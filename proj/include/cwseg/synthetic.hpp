#pragma once

#include <cstdint>
#include <vector>

#include "cwseg/image_io.hpp"
#include "cwseg/sampler.hpp"

namespace cwseg {

// Procedural test scenes with known ground truth.

struct SyntheticScene {
    RasterImage image;
    GroundTruthMask mask;
};

/// Gray size x size scene: an elliptical object filled with a noisy diagonal
/// grating, on a background of blocky noise.
SyntheticScene two_texture_scene(int size, std::uint64_t seed);

/// Gray scene whose left half holds vertical cosine stripes of the given period
/// (marked Object) and whose right half is flat at the stripes' mean.
SyntheticScene stripes_vs_uniform(int width, int height, int period);

/// Balanced labeled windows whose intensities are i.i.d. Gaussian: Object
/// around 170, Background around 85, both with std 25, clipped to [0, 255].
std::vector<LabeledSample> gaussian_texture_windows(int count, int window, std::uint64_t seed);

}  // namespace cwseg
