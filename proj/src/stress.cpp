#include "pbf/stress.hpp"

#include <algorithm>
#include <cmath>

#include "pbf/error.hpp"

namespace pbf {

void StressParams::validate() const {
  require(constraint_factor > 0.0 && constraint_factor <= 1.0,
          "stress constraint factor must lie in (0, 1]");
}

StressField residual_stress(const TemperatureSnapshot& snapshot, const RandomInputs& z,
                            const ModelParams& p, const StressParams& sp) {
  sp.validate();
  require(snapshot.peak_field.size() == kStressSize,
          "peak field must hold 32 x 14 = 448 values, got " +
              std::to_string(snapshot.peak_field.size()));
  require(z.yield >= 0.0, "yield strength must be non-negative");
  require(z.modulus >= 0.0, "elastic modulus must be non-negative");

  const double modulus_mpa = z.modulus * 1000.0;
  const double slope = sp.constraint_factor * modulus_mpa * p.thermal_expansion;
  StressField out;
  out.grid.resize(kStressSize);
  for (std::size_t i = 0; i < kStressSize; ++i) {
    const double rise = std::max(0.0, snapshot.peak_field[i] - z.preheat);
    out.grid[i] = std::min(z.yield, slope * rise);
  }
  out.sigma_max = max_stress(out.grid);
  return out;
}

double max_stress(std::span<const double> field) {
  require(!field.empty(), "stress field is empty");
  return *std::max_element(field.begin(), field.end());
}

}  // namespace pbf
