#include "pbf/doe.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "pbf/error.hpp"
#include "pbf/rng.hpp"

namespace pbf {

namespace {

void check_bounds(const InputBounds& bounds) {
  for (const auto& b : bounds) {
    require(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper,
            "input bounds must be finite with lower < upper");
  }
}

// Stratum permutation with perm[m-1-i] = m-1-perm[i].
std::vector<int> symmetric_permutation(int m, Rng& rng) {
  std::vector<int> perm(m);
  const int half = m / 2;
  std::vector<int> strata(half);
  std::iota(strata.begin(), strata.end(), 0);
  rng.shuffle(strata.begin(), strata.end());
  for (int i = 0; i < half; ++i) {
    const int s = rng.coin() ? strata[i] : m - 1 - strata[i];
    perm[i] = s;
    perm[m - 1 - i] = m - 1 - s;
  }
  if (m % 2 == 1) perm[half] = half;
  return perm;
}

}  // namespace

double min_pairwise_distance(const std::vector<InputVector>& points, const InputBounds& bounds) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < kNumInputs; ++i) {
        const double t = (points[a][i] - points[b][i]) / bounds[i].width();
        d2 += t * t;
      }
      best = std::min(best, d2);
    }
  }
  return std::sqrt(best);
}

std::vector<InputVector> generate_doe(int m, const InputBounds& bounds, std::uint64_t seed,
                                      int candidates) {
  require(m >= 1, "design size must be at least 1");
  require(candidates >= 1, "need at least one candidate design");
  check_bounds(bounds);
  Rng rng(seed);
  std::vector<InputVector> best;
  double best_dist = -1.0;
  for (int c = 0; c < candidates; ++c) {
    std::vector<InputVector> pts(m);
    for (std::size_t i = 0; i < kNumInputs; ++i) {
      const auto perm = symmetric_permutation(m, rng);
      for (int r = 0; r < m; ++r) {
        pts[r][i] = bounds[i].lower + (perm[r] + 0.5) / m * bounds[i].width();
      }
    }
    const double d = m >= 2 ? min_pairwise_distance(pts, bounds) : 0.0;
    if (d > best_dist) {
      best_dist = d;
      best = std::move(pts);
    }
  }
  return best;
}

std::vector<RandomInputs> sample_random_inputs(std::size_t n, const InputBounds& bounds,
                                               std::uint64_t seed) {
  check_bounds(bounds);
  Rng rng(seed);
  std::vector<RandomInputs> out(n);
  for (auto& z : out) {
    z.preheat = rng.uniform(bounds[2].lower, bounds[2].upper);
    z.yield = rng.uniform(bounds[3].lower, bounds[3].upper);
    z.modulus = rng.uniform(bounds[4].lower, bounds[4].upper);
    z.density = rng.uniform(bounds[5].lower, bounds[5].upper);
  }
  return out;
}

}  // namespace pbf
