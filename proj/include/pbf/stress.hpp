#pragma once

// Residual-stress proxy on the 32 x 14 midplane grid.
//
// This is a reduced stand-in for a mechanical FE solve: each grid point takes
// the constrained thermal-strain stress of its peak temperature rise above
// the preheat, capped at the yield strength (elastic-perfectly plastic).
//
//   sigma = min(Y, c_r * E * alpha_t * max(0, T_peak - T0))

#include <span>
#include <vector>

#include "pbf/thermal.hpp"

namespace pbf {

struct StressParams {
  double constraint_factor = 0.6;  ///< c_r in (0, 1]

  void validate() const;
};

struct StressField {
  std::vector<double> grid;  ///< von Mises stress [MPa], stress_index() layout
  double sigma_max = 0.0;
};

StressField residual_stress(const TemperatureSnapshot& snapshot, const RandomInputs& z,
                            const ModelParams& p, const StressParams& sp = {});

double max_stress(std::span<const double> field);
inline double max_stress(const StressField& f) { return max_stress(f.grid); }

}  // namespace pbf
