#pragma once

// Sampling-based risk measures for a scalar limit state g(d, Z).
//
// All estimators work on the empirical distribution of the samples:
//   quantile        Q_a       value-at-risk at reliability level a
//   superquantile   Qbar_a    Q_a + E[(g - Q_a)^+] / (1 - a)
//   pof             p_t       P[g > t]
//   bpof            pbar_t    min_{z < t} E[(g - z)^+] / (t - z), clipped to [0, 1]
//
// Failure is strict exceedance (g > t). Samples equal to the threshold fall
// into the buffer, never into the POF.

#include <cstddef>
#include <span>
#include <vector>

namespace pbf::risk {

/// Finite, non-empty set of limit-state realizations. Stores a copy sorted in
/// descending order; the input order carries no meaning.
class SampleSet {
public:
  explicit SampleSet(std::span<const double> values);
  explicit SampleSet(const std::vector<double>& values)
      : SampleSet(std::span<const double>(values)) {}

  std::size_t size() const { return desc_.size(); }
  /// Samples sorted largest first.
  std::span<const double> descending() const { return desc_; }
  double max() const { return desc_.front(); }
  double min() const { return desc_.back(); }
  double mean() const { return mean_; }
  /// Sum of the k largest samples, k in [0, size].
  double top_sum(std::size_t k) const { return prefix_[k]; }

private:
  std::vector<double> desc_;
  std::vector<double> prefix_;
  double mean_ = 0.0;
};

struct BpofResult {
  double bpof = 0.0;
  /// Minimizing auxiliary threshold. Only meaningful when 0 < bpof < 1; at the
  /// boundary cases it is set to the sample max (bpof = 0) or the sample mean
  /// (bpof = 1).
  double zeta = 0.0;
};

struct TailBpof {
  double bpof = 0.0;
  /// Threshold at which the returned bpof holds (the running tail mean).
  double tau = 0.0;
};

struct BpofSplit {
  /// Near-failure mass P[g in [zeta, tau]], with the atom at zeta weighted
  /// so that buffer + pof reproduces bpof_minform.
  double buffer = 0.0;
  double pof = 0.0;
  double zeta = 0.0;
};

struct RiskEstimate {
  double alpha = 0.0;
  double tau = 0.0;
  double quantile = 0.0;
  double superquantile = 0.0;
  double pof = 0.0;
  double bpof = 0.0;
  double zeta = 0.0;
};

/// Index of the alpha-quantile in the descending order, 1-based:
/// k = max(1, round(m (1 - alpha))), capped at m.
std::size_t quantile_rank(std::size_t m, double alpha);

/// alpha in (0, 1).
double quantile(const SampleSet& s, double alpha);

/// alpha in [0, 1); alpha = 0 returns the sample mean.
double superquantile(const SampleSet& s, double alpha);

double pof(const SampleSet& s, double tau);

/// Buffered probability of failure via its expectation (min over zeta) form.
BpofResult bpof_minform(const SampleSet& s, double tau);

/// Tail-growing estimator: add samples from the top until the running tail
/// mean drops below Qbar_alpha, returning ((k - 1) / m, running mean).
TailBpof bpof_tail(const SampleSet& s, double alpha);

/// Split of bpof into the buffer term plus the POF.
BpofSplit bpof_decomposition(const SampleSet& s, double tau);

/// E[(g - zeta)^+] / (tau - zeta) over the samples; zeta < tau.
double bpof_ratio(std::span<const double> values, double zeta, double tau);

RiskEstimate estimate(const SampleSet& s, double alpha, double tau);

}  // namespace pbf::risk
