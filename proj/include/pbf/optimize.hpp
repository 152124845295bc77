#pragma once

// Risk-constrained process design.
//
//   min_{v, P, zeta}  P l / v
//   s.t.  E[(sigma_max - zeta)^+] / (tau - zeta) <= 1 - alpha_T
//         T_liq <= mean T_max <= 1.1 T_liq
//         zeta < tau, (v, P) in the design box
//
// Expectations are sample averages over one frozen set of random inputs, so
// the problem is deterministic in the design.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pbf/surrogate.hpp"
#include "pbf/thermal.hpp"

namespace pbf {

enum class Solver { penalty_nelder_mead, cobyla_like };
enum class RiskConstraint { bpof, pof };

std::string to_string(Solver s);
Solver solver_from_string(const std::string& s);
std::string to_string(RiskConstraint c);
RiskConstraint risk_constraint_from_string(const std::string& s);

struct OptimizeConfig {
  double alpha_t = 0.95;
  double tau = 825.0;  ///< MPa; may be +inf to drop the stress constraint
  int n_mc = 20000;
  Interval speed_bounds{100.0, 1000.0};
  Interval power_bounds{20.0, 200.0};
  double t_lower = 1650.0;  ///< may be -inf
  double t_upper = 1815.0;  ///< may be +inf
  double length = 2.0;      ///< scan length l [mm]
  std::uint64_t seed = 20240;
  Solver solver = Solver::penalty_nelder_mead;
  RiskConstraint constraint = RiskConstraint::bpof;
  int max_iters = 500;
  int restarts = 8;
  /// Allowed excess of the risk constraint (absolute) and of the temperature
  /// window (relative to its width, or 1 degC when unbounded).
  double constraint_tol = 1e-4;
  double x_tol = 1e-4;  ///< simplex diameter / trust radius in normalized units

  void validate() const;
};

/// P l / v [J].
double energy(const DesignPoint& d, double length);

/// mean[(sigma - zeta)^+] / (tau - zeta); 0 when tau is +inf.
double bpof_lhs(std::span<const double> sigma_max, double zeta, double tau);

struct ConstraintValues {
  double risk = 0.0;       ///< bpof_lhs, or the POF in pof mode
  double t_max_hat = 0.0;  ///< mean of per-sample maximum temperatures
};

/// Constraint values at (d, zeta) with the evaluator's frozen samples.
ConstraintValues evaluate_constraints(const DesignPoint& d, double zeta,
                                      const BundleEvaluator& eval, const OptimizeConfig& cfg);

/// Convenience overload that prepares an evaluator for the given samples.
ConstraintValues evaluate_constraints(const DesignPoint& d, double zeta, const SurrogateBundle& b,
                                      std::span<const RandomInputs> samples,
                                      const OptimizeConfig& cfg);

struct HistoryEntry {
  int iteration = 0;
  DesignPoint d;
  double zeta = 0.0;
  double energy = 0.0;
  double risk = 0.0;
  double t_max_hat = 0.0;
  bool feasible = false;
};

struct OptimizationResult {
  DesignPoint d0;
  DesignPoint d_star;
  double zeta_star = 0.0;
  double energy = 0.0;
  double bpof_lhs = 0.0;  ///< risk-constraint value at the optimum
  double t_max_hat = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool feasible = false;
  bool iteration_limit = false;
  std::vector<HistoryEntry> history;
};

/// True when the values satisfy every constraint within cfg.constraint_tol.
bool is_feasible(const ConstraintValues& c, const OptimizeConfig& cfg);

/// Solves from d0 with cfg.n_mc random inputs drawn from cfg.seed.
OptimizationResult solve(const SurrogateBundle& b, const OptimizeConfig& cfg, const DesignPoint& d0);

/// Solves from d0 using an evaluator prepared over the frozen samples.
OptimizationResult solve(const BundleEvaluator& eval, const OptimizeConfig& cfg,
                         const DesignPoint& d0);

}  // namespace pbf
