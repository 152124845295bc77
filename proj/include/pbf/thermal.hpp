#pragma once

// Reduced single-scan thermal model.
//
// Transient conduction rho Cp(T) dT/dt = div(kappa(T) grad T) + Q_e is solved
// on the x-z midplane [0, l] x [0, h] of the part with explicit finite
// differences. The beam travels along +x on the top surface (z = h) at speed
// v, starting at x = 0 when t = 0. Sides and bottom are insulated; the top
// surface radiates to the chamber.
//
// Units inside the solver: mm, s, W, J, kg, degC (radiation in K).

#include <array>
#include <cstddef>
#include <vector>

namespace pbf {

struct DesignPoint {
  double speed = 500.0;  ///< scanning speed v [mm/s]
  double power = 160.0;  ///< beam power P [W]
};

struct RandomInputs {
  double preheat = 650.0;   ///< T0 [degC]
  double yield = 825.0;     ///< Y [MPa]
  double modulus = 110.0;   ///< E [GPa]
  double density = 612.0;   ///< rho, relative-density factor [kg/m^3]
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool operator==(const Interval&) const = default;
};

/// Number of model inputs: (v, P, T0, Y, E, rho).
inline constexpr std::size_t kNumInputs = 6;
using InputVector = std::array<double, kNumInputs>;
using InputBounds = std::array<Interval, kNumInputs>;

InputVector make_input(const DesignPoint& d, const RandomInputs& z);
DesignPoint design_of(const InputVector& xi);
RandomInputs random_of(const InputVector& xi);

/// Design box and random-variable ranges of the reference setup.
InputBounds default_input_bounds();

struct ModelParams {
  // Cp(T) = a0 + a1 T + a2 T^2 [J/(kg K)]
  double a0 = 540.0, a1 = 0.43, a2 = -3.2e-5;
  // kappa(T) = b0 + b1 T + b2 T^2 [W/(m K)]
  double b0 = 7.2, b1 = 0.011, b2 = 1.4e-6;
  double absorptivity = 0.203;
  double spot_radius = 0.2;        ///< r [mm]
  double penetration_depth = 0.05; ///< z0 [mm]
  double emissivity = 0.35;
  double chamber_temp = 650.0;     ///< Tc [degC]
  double liquidus_temp = 1650.0;   ///< Tliq [degC]
  double length = 2.0;             ///< l [mm]
  double width = 1.5;              ///< w [mm]
  double height = 0.65;            ///< h [mm]
  double thermal_expansion = 1e-5; ///< alpha_t [1/K]

  void validate() const;
};

struct SimGridConfig {
  int cells_x = 64;
  int cells_z = 26;
  double cfl_factor = 0.4;

  void validate() const;
};

inline constexpr std::size_t kNumSnapshots = 31;
inline constexpr std::size_t kStressNx = 32;
inline constexpr std::size_t kStressNz = 14;
inline constexpr std::size_t kStressSize = kStressNx * kStressNz;

/// Flat index into a 32 x 14 stress-grid field: length index fastest, height
/// index iz = 0 at the bottom of the part.
constexpr std::size_t stress_index(std::size_t ix, std::size_t iz) { return iz * kStressNx + ix; }

struct TemperatureSnapshot {
  std::array<double, kNumSnapshots> times{};
  std::array<double, kNumSnapshots> temps{};
  double t_scan = 0.0;
  /// Running maximum temperature per stress-grid point over the scan.
  std::vector<double> peak_field;

  double max_temp() const;
};

/// 10 points on [0, 0.405 t], 10 on [0.45 t, 0.54 t], 11 on [0.55 t, t],
/// with t = length / speed.
std::array<double, kNumSnapshots> snapshot_times(double speed, double length);

/// Gaussian beam source Q_e [W/mm^3]; z is the depth below the top surface.
double heat_flux(double x, double y, double depth, double t, const DesignPoint& d,
                 const ModelParams& p);

struct MaterialProps {
  double cp = 0.0;     ///< J/(kg K)
  double kappa = 0.0;  ///< W/(m K)
};

MaterialProps material_props(double temp, const ModelParams& p);

/// Density used by the solver [kg/m^3]. The random density factor is scaled
/// so that its nominal value maps to the 4300 kg/m^3 effective density.
double effective_density(double density_factor);

/// Largest stable explicit time step [s] for the run.
double stable_time_step(const RandomInputs& z, const ModelParams& p, const SimGridConfig& grid);

TemperatureSnapshot simulate(const DesignPoint& d, const RandomInputs& z, const ModelParams& p,
                             const SimGridConfig& grid = {});

}  // namespace pbf
