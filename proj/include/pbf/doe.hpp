#pragma once

// Design of experiments and Monte Carlo input sampling.

#include <cstdint>
#include <vector>

#include "pbf/thermal.hpp"

namespace pbf {

/// Centred symmetric Latin hypercube over the six inputs. Each coordinate
/// places exactly one point in each of M equal strata, and point i is the
/// reflection of point M-1-i through the box midpoint. Of 50 seeded
/// candidates the one with the largest minimum pairwise distance (in
/// normalized coordinates) is kept.
std::vector<InputVector> generate_doe(int m, const InputBounds& bounds, std::uint64_t seed,
                                      int candidates = 50);

/// Smallest pairwise Euclidean distance after mapping each input to [0, 1].
double min_pairwise_distance(const std::vector<InputVector>& points, const InputBounds& bounds);

/// n independent draws of (T0, Y, E, rho), each uniform on its range.
std::vector<RandomInputs> sample_random_inputs(std::size_t n, const InputBounds& bounds,
                                               std::uint64_t seed);

}  // namespace pbf
