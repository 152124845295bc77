#include "pbf/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pbf/error.hpp"

namespace pbf {

namespace {

constexpr double kStefanBoltzmann = 5.67e-14;  // W mm^-2 K^-4
constexpr double kKelvin = 273.15;
constexpr double kNominalDensityFactor = 612.0;
constexpr double kEffectiveDensity = 4300.0;

double to_kelvin(double c) { return c + kKelvin; }

// Integral of the depth profile (1/5)(-3 s^2 - 2 s + 5), s = depth / z0, over
// [lo, hi] in mm. The profile vanishes below the penetration depth.
double depth_profile_integral(double lo, double hi, double z0) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, z0);
  if (hi <= lo) return 0.0;
  auto antiderivative = [z0](double z) {
    return (-z * z * z / (z0 * z0) - z * z / z0 + 5.0 * z) / 5.0;
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace

InputVector make_input(const DesignPoint& d, const RandomInputs& z) {
  return {d.speed, d.power, z.preheat, z.yield, z.modulus, z.density};
}

DesignPoint design_of(const InputVector& xi) { return {xi[0], xi[1]}; }

RandomInputs random_of(const InputVector& xi) { return {xi[2], xi[3], xi[4], xi[5]}; }

InputBounds default_input_bounds() {
  return {{{100.0, 1000.0},
           {20.0, 200.0},
           {585.0, 715.0},
           {742.5, 907.5},
           {100.0, 120.0},
           {550.8, 673.2}}};
}

void ModelParams::validate() const {
  require(spot_radius > 0.0, "beam spot radius must be positive");
  require(penetration_depth > 0.0 && penetration_depth <= height,
          "penetration depth must lie in (0, h]");
  require(absorptivity > 0.0 && absorptivity <= 1.0, "absorptivity must lie in (0, 1]");
  require(length > 0.0 && width > 0.0 && height > 0.0, "part dimensions must be positive");
  require(emissivity >= 0.0 && emissivity <= 1.0, "emissivity must lie in [0, 1]");
  require(liquidus_temp > chamber_temp, "liquidus must exceed chamber temperature");
  const double lo = chamber_temp - 100.0;
  const double hi = 3.0 * liquidus_temp;
  for (int i = 0; i <= 64; ++i) {
    const double t = lo + (hi - lo) * i / 64.0;
    const auto m = material_props(t, *this);
    require(m.cp > 0.0 && m.kappa > 0.0,
            "Cp and kappa coefficients must stay positive over the working range");
  }
}

void SimGridConfig::validate() const {
  require(cells_x >= 4 && cells_z >= 4, "thermal grid needs at least 4 cells per direction");
  require(cfl_factor > 0.0 && cfl_factor <= 1.0,
          "cfl_factor must lie in (0, 1] for a stable explicit scheme");
}

double TemperatureSnapshot::max_temp() const {
  return *std::max_element(temps.begin(), temps.end());
}

std::array<double, kNumSnapshots> snapshot_times(double speed, double length) {
  require(speed > 0.0, "scanning speed must be positive");
  require(length > 0.0, "part length must be positive");
  const double t = length / speed;
  std::array<double, kNumSnapshots> out{};
  for (int i = 0; i < 10; ++i) out[i] = 0.405 * t * i / 9.0;
  for (int i = 0; i < 10; ++i) out[10 + i] = t * (0.45 + 0.09 * i / 9.0);
  for (int i = 0; i < 11; ++i) out[20 + i] = t * (0.55 + 0.45 * i / 10.0);
  out[30] = t;
  return out;
}

double heat_flux(double x, double y, double depth, double t, const DesignPoint& d,
                 const ModelParams& p) {
  if (depth < 0.0 || depth > p.penetration_depth) return 0.0;
  const double r = p.spot_radius;
  const double z0 = p.penetration_depth;
  const double peak = 2.0 * p.absorptivity * d.power / (std::numbers::pi * r * r * z0);
  const double dx = x - d.speed * t;
  const double s = depth / z0;
  return peak * std::exp(-2.0 * (dx * dx + y * y) / (r * r)) * (-3.0 * s * s - 2.0 * s + 5.0) / 5.0;
}

MaterialProps material_props(double temp, const ModelParams& p) {
  return {p.a0 + p.a1 * temp + p.a2 * temp * temp, p.b0 + p.b1 * temp + p.b2 * temp * temp};
}

double effective_density(double density_factor) {
  return density_factor * (kEffectiveDensity / kNominalDensityFactor);
}

double stable_time_step(const RandomInputs& z, const ModelParams& p, const SimGridConfig& grid) {
  grid.validate();
  const double dx = p.length / grid.cells_x;
  const double dz = p.height / grid.cells_z;
  const double delta = std::min(dx, dz);
  const double rho = effective_density(z.density) * 1e-9;  // kg/mm^3
  const double lo = std::min(z.preheat, p.chamber_temp) - 50.0;
  const double hi = 3.0 * p.liquidus_temp;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 256; ++i) {
    const double t = lo + (hi - lo) * i / 256.0;
    const auto m = material_props(t, p);
    best = std::min(best, rho * m.cp * delta * delta / (4.0 * m.kappa * 1e-3));
  }
  return grid.cfl_factor * best;
}

TemperatureSnapshot simulate(const DesignPoint& d, const RandomInputs& z, const ModelParams& p,
                             const SimGridConfig& grid) {
  p.validate();
  grid.validate();
  require(d.speed > 0.0, "scanning speed must be positive");
  require(d.power >= 0.0, "beam power must be non-negative");
  require(z.density > 0.0, "density must be positive");

  const int nx = grid.cells_x;
  const int nz = grid.cells_z;
  const double dx = p.length / nx;
  const double dz = p.height / nz;
  const double rho = effective_density(z.density) * 1e-9;
  const double dt_max = stable_time_step(z, p, grid);
  const double low_limit = std::min(z.preheat, p.chamber_temp) - 50.0;
  const double high_limit = 3.0 * p.liquidus_temp;

  const double r = p.spot_radius;
  const double peak_flux =
      2.0 * p.absorptivity * d.power / (std::numbers::pi * r * r * p.penetration_depth);
  const double gauss_norm = r * std::sqrt(std::numbers::pi / 8.0) / dx;
  const double erf_scale = std::sqrt(2.0) / r;

  // Cell-averaged depth factor, row k counted from the bottom.
  std::vector<double> depth_factor(nz);
  for (int k = 0; k < nz; ++k) {
    const double top_depth = p.height - (k + 1) * dz;
    depth_factor[k] = depth_profile_integral(top_depth, top_depth + dz, p.penetration_depth) / dz;
  }
  int first_heated = nz;
  for (int k = 0; k < nz; ++k) {
    if (depth_factor[k] > 0.0) {
      first_heated = k;
      break;
    }
  }

  const std::size_t ncell = static_cast<std::size_t>(nx) * nz;
  auto at = [nx](int i, int k) { return static_cast<std::size_t>(k) * nx + i; };
  std::vector<double> temp(ncell, z.preheat), next(ncell), kappa(ncell), peak(ncell, z.preheat);
  std::vector<double> xsrc(nx), edge_erf(nx + 1);

  const double tc4 = std::pow(to_kelvin(p.chamber_temp), 4);
  const double rad_coeff = kStefanBoltzmann * p.emissivity / dz;
  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_dz2 = 1.0 / (dz * dz);

  auto probe = [&]() {
    if (nx % 2 == 0) return 0.5 * (temp[at(nx / 2 - 1, nz - 1)] + temp[at(nx / 2, nz - 1)]);
    return temp[at(nx / 2, nz - 1)];
  };

  TemperatureSnapshot snap;
  snap.times = snapshot_times(d.speed, p.length);
  snap.t_scan = p.length / d.speed;

  long step = 0;
  double t = 0.0;
  auto check_probe = [&](double value) {
    if (!std::isfinite(value) || value < low_limit || value > high_limit) {
      std::ostringstream os;
      os << "thermal solve diverged at step " << step << " (t = " << t
         << " s): probe temperature " << value << " outside [" << low_limit << ", "
         << high_limit << "]";
      throw Error(os.str());
    }
  };

  snap.temps[0] = probe();
  check_probe(snap.temps[0]);
  for (std::size_t s = 1; s < kNumSnapshots; ++s) {
    const double span = snap.times[s] - snap.times[s - 1];
    const long nsub = std::max(1L, static_cast<long>(std::ceil(span / dt_max)));
    const double h = span / static_cast<double>(nsub);
    for (long sub = 0; sub < nsub; ++sub) {
      t = snap.times[s - 1] + h * static_cast<double>(sub);
      const double beam_x = d.speed * t;
      for (int i = 0; i <= nx; ++i) edge_erf[i] = std::erf(erf_scale * (i * dx - beam_x));
      for (int i = 0; i < nx; ++i) xsrc[i] = peak_flux * gauss_norm * (edge_erf[i + 1] - edge_erf[i]);
      for (std::size_t c = 0; c < ncell; ++c) {
        const double tt = temp[c];
        kappa[c] = 1e-3 * (p.b0 + p.b1 * tt + p.b2 * tt * tt);
      }
      for (int k = 0; k < nz; ++k) {
        for (int i = 0; i < nx; ++i) {
          const std::size_t c = at(i, k);
          const double tc = temp[c];
          const double kc = kappa[c];
          double div = 0.0;
          if (i > 0) div += 0.5 * (kc + kappa[c - 1]) * (temp[c - 1] - tc) * inv_dx2;
          if (i < nx - 1) div += 0.5 * (kc + kappa[c + 1]) * (temp[c + 1] - tc) * inv_dx2;
          if (k > 0) div += 0.5 * (kc + kappa[c - nx]) * (temp[c - nx] - tc) * inv_dz2;
          if (k < nz - 1) {
            div += 0.5 * (kc + kappa[c + nx]) * (temp[c + nx] - tc) * inv_dz2;
          } else {
            const double tk = to_kelvin(tc);
            div -= rad_coeff * (tk * tk * tk * tk - tc4);
          }
          if (k >= first_heated) div += xsrc[i] * depth_factor[k];
          const double cp = p.a0 + p.a1 * tc + p.a2 * tc * tc;
          next[c] = tc + h * div / (rho * cp);
        }
      }
      temp.swap(next);
      for (std::size_t c = 0; c < ncell; ++c) peak[c] = std::max(peak[c], temp[c]);
      ++step;
    }
    t = snap.times[s];
    snap.temps[s] = probe();
    check_probe(snap.temps[s]);
  }
  for (double v : temp) {
    if (!std::isfinite(v)) {
      throw Error("thermal solve produced a non-finite field at step " + std::to_string(step));
    }
  }

  // Bilinear resampling of the cell-centred peak field onto the stress grid.
  snap.peak_field.resize(kStressSize);
  auto axis_weight = [](double pos, double cell, int n, int& lo, double& w) {
    double u = pos / cell - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    lo = std::min(static_cast<int>(std::floor(u)), n - 2);
    w = u - lo;
  };
  for (std::size_t iz = 0; iz < kStressNz; ++iz) {
    int k0;
    double wz;
    axis_weight((iz + 0.5) * p.height / kStressNz, dz, nz, k0, wz);
    for (std::size_t ix = 0; ix < kStressNx; ++ix) {
      int i0;
      double wx;
      axis_weight((ix + 0.5) * p.length / kStressNx, dx, nx, i0, wx);
      const double bottom = (1 - wx) * peak[at(i0, k0)] + wx * peak[at(i0 + 1, k0)];
      const double top = (1 - wx) * peak[at(i0, k0 + 1)] + wx * peak[at(i0 + 1, k0 + 1)];
      snap.peak_field[stress_index(ix, iz)] = (1 - wz) * bottom + wz * top;
    }
  }
  return snap;
}

}  // namespace pbf
