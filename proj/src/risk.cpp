#include "pbf/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "pbf/error.hpp"

namespace pbf::risk {

SampleSet::SampleSet(std::span<const double> values) {
  require(!values.empty(), "sample set is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]),
            "sample " + std::to_string(i) + " is not finite");
  }
  desc_.assign(values.begin(), values.end());
  std::stable_sort(desc_.begin(), desc_.end(), std::greater<>());
  prefix_.resize(desc_.size() + 1);
  prefix_[0] = 0.0;
  for (std::size_t i = 0; i < desc_.size(); ++i) prefix_[i + 1] = prefix_[i] + desc_[i];
  mean_ = prefix_.back() / static_cast<double>(desc_.size());
}

namespace {

bool all_equal(const SampleSet& s) { return s.max() == s.min(); }

// Mean of (g - zeta)^+ using the sorted tail: the j samples above zeta.
double mean_excess(const SampleSet& s, double zeta) {
  const auto desc = s.descending();
  const auto above = static_cast<std::size_t>(
      std::upper_bound(desc.begin(), desc.end(), zeta, std::greater<>()) - desc.begin());
  const double sum = s.top_sum(above) - static_cast<double>(above) * zeta;
  return std::max(0.0, sum) / static_cast<double>(s.size());
}

double ratio(const SampleSet& s, double zeta, double tau) {
  return mean_excess(s, zeta) / (tau - zeta);
}

}  // namespace

std::size_t quantile_rank(std::size_t m, double alpha) {
  const double x = static_cast<double>(m) * (1.0 - alpha);
  auto k = static_cast<std::size_t>(std::max(1.0, std::round(x)));
  return std::min(k, m);
}

double quantile(const SampleSet& s, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "quantile level must lie in (0, 1)");
  return s.descending()[quantile_rank(s.size(), alpha) - 1];
}

double superquantile(const SampleSet& s, double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "superquantile level must lie in [0, 1)");
  if (alpha == 0.0) return s.mean();
  const double q = quantile(s, alpha);
  return q + mean_excess(s, q) / (1.0 - alpha);
}

double pof(const SampleSet& s, double tau) {
  const auto desc = s.descending();
  const auto above =
      std::lower_bound(desc.begin(), desc.end(), tau, std::greater<>()) - desc.begin();
  return static_cast<double>(above) / static_cast<double>(s.size());
}

double bpof_ratio(std::span<const double> values, double zeta, double tau) {
  require(!values.empty(), "sample set is empty");
  require(zeta < tau, "auxiliary threshold must be below the failure threshold");
  double sum = 0.0;
  for (double g : values) sum += std::max(0.0, g - zeta);
  return sum / static_cast<double>(values.size()) / (tau - zeta);
}

BpofResult bpof_minform(const SampleSet& s, double tau) {
  require(std::isfinite(tau), "failure threshold must be finite");
  if (all_equal(s)) {
    return tau <= s.max() ? BpofResult{1.0, s.mean()} : BpofResult{0.0, s.max()};
  }
  if (tau <= s.mean()) return {1.0, s.mean()};
  if (tau >= s.max()) return {0.0, s.max()};

  // The ratio is linear-fractional between consecutive samples, so its
  // minimum sits on a sample value. Candidates: every distinct sample below
  // tau, plus one point far below the data where the ratio tends to 1.
  const auto desc = s.descending();
  double best_zeta = s.min() - (s.max() - s.min());
  double best = ratio(s, best_zeta, tau);
  std::size_t best_idx = desc.size();
  for (std::size_t i = 0; i < desc.size(); ++i) {
    const double z = desc[i];
    if (z >= tau || (i > 0 && z == desc[i - 1])) continue;
    const double r = ratio(s, z, tau);
    if (r < best) {
      best = r;
      best_zeta = z;
      best_idx = i;
    }
  }

  // Golden-section pass over the bracket around the best breakpoint. The
  // ratio is quasiconvex in zeta, so this can only confirm or improve it.
  if (best_idx < desc.size()) {
    double lo = best_idx + 1 < desc.size() ? desc[best_idx + 1] : best_zeta;
    double hi = best_zeta;
    for (std::size_t j = best_idx; j-- > 0;) {
      if (desc[j] > best_zeta) {
        hi = std::min(desc[j], std::nextafter(tau, -std::numeric_limits<double>::infinity()));
        break;
      }
    }
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = ratio(s, c, tau), fd = ratio(s, d, tau);
    for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
      if (fc <= fd) {
        b = d; d = c; fd = fc;
        c = b - kInvPhi * (b - a); fc = ratio(s, c, tau);
      } else {
        a = c; c = d; fc = fd;
        d = a + kInvPhi * (b - a); fd = ratio(s, d, tau);
      }
    }
    const double zg = fc <= fd ? c : d;
    const double rg = std::min(fc, fd);
    if (rg < best) {
      best = rg;
      best_zeta = zg;
    }
  }
  return {std::clamp(best, 0.0, 1.0), best_zeta};
}

TailBpof bpof_tail(const SampleSet& s, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "reliability level must lie in (0, 1)");
  const double qbar = superquantile(s, alpha);
  const std::size_t m = s.size();
  std::size_t k = 1;
  double c = s.descending()[0];
  while (c >= qbar) {
    if (k == m) return {1.0, c};
    ++k;
    c = s.top_sum(k) / static_cast<double>(k);
  }
  return {static_cast<double>(k - 1) / static_cast<double>(m), c};
}

BpofSplit bpof_decomposition(const SampleSet& s, double tau) {
  const auto b = bpof_minform(s, tau);
  const double p = pof(s, tau);
  return {std::max(0.0, b.bpof - p), p, b.zeta};
}

RiskEstimate estimate(const SampleSet& s, double alpha, double tau) {
  RiskEstimate r;
  r.alpha = alpha;
  r.tau = tau;
  r.quantile = quantile(s, alpha);
  r.superquantile = superquantile(s, alpha);
  r.pof = pof(s, tau);
  const auto b = bpof_minform(s, tau);
  r.bpof = b.bpof;
  r.zeta = std::min(b.zeta, tau);
  return r;
}

}  // namespace pbf::risk
