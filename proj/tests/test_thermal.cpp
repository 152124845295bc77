#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pbf/error.hpp"
#include "pbf/rng.hpp"
#include "pbf/stress.hpp"
#include "pbf/thermal.hpp"

using namespace pbf;

TEST_CASE("snapshot times follow the three blocks") {
  const auto t = snapshot_times(1000.0, 2.0);
  const double ts = 0.002;
  for (int i = 0; i < 10; ++i) CHECK(t[i] == doctest::Approx(0.405 * ts / 9.0 * i));
  CHECK(t[10] == doctest::Approx(0.45 * ts));
  CHECK(t[19] == doctest::Approx(0.54 * ts));
  CHECK(t[20] == doctest::Approx(0.55 * ts));
  CHECK(t[30] == doctest::Approx(ts));
  CHECK(snapshot_times(100.0, 2.0)[30] == doctest::Approx(0.02));
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK_THROWS_AS(snapshot_times(0.0, 2.0), Error);
}

TEST_CASE("heat flux at the centre, the penetration depth and one radius out") {
  const ModelParams p;
  const DesignPoint d{500.0, 160.0};
  const double t = 1e-3;
  const double centre = 2.0 * p.absorptivity * d.power /
                        (M_PI * p.spot_radius * p.spot_radius * p.penetration_depth);
  CHECK(heat_flux(d.speed * t, 0.0, 0.0, t, d, p) == doctest::Approx(centre));
  CHECK(heat_flux(d.speed * t, 0.0, p.penetration_depth, t, d, p) == doctest::Approx(0.0));
  CHECK(heat_flux(d.speed * t + p.spot_radius, 0.0, 0.0, t, d, p) ==
        doctest::Approx(centre * std::exp(-2.0)));
  CHECK(heat_flux(d.speed * t, 0.0, 2.0 * p.penetration_depth, t, d, p) == 0.0);
}

TEST_CASE("material properties are the quadratic fits") {
  ModelParams p;
  auto m0 = material_props(0.0, p);
  CHECK(m0.cp == doctest::Approx(540.0));
  CHECK(m0.kappa == doctest::Approx(7.2));
  auto m1 = material_props(1000.0, p);
  CHECK(m1.cp == doctest::Approx(938.0));
  CHECK(m1.kappa == doctest::Approx(19.6));
  p.a1 = p.a2 = 0.0;
  p.b1 = p.b2 = 0.0;
  CHECK(material_props(1234.0, p).cp == 540.0);
  CHECK(material_props(1234.0, p).kappa == 7.2);
}

TEST_CASE("zero source between equal reservoirs stays put") {
  const ModelParams p;
  RandomInputs z;
  z.preheat = p.chamber_temp;
  const auto s = simulate({500.0, 0.0}, z, p);
  for (double T : s.temps) CHECK(std::abs(T - p.chamber_temp) < 1e-6);
  for (double T : s.peak_field) CHECK(std::abs(T - p.chamber_temp) < 1e-6);
}

TEST_CASE("nominal run peaks in the middle snapshot block") {
  const auto s = simulate({500.0, 160.0}, RandomInputs{}, ModelParams{});
  const auto it = std::max_element(s.temps.begin(), s.temps.end());
  const auto idx = it - s.temps.begin();
  CHECK(idx >= 10);
  CHECK(idx <= 20);
  CHECK(s.max_temp() == *it);
  CHECK(s.peak_field.size() == kStressSize);
}

TEST_CASE("peak temperature rises with power and falls with speed") {
  const ModelParams p;
  double last = 0.0;
  for (double P : {40.0, 80.0, 120.0, 160.0, 200.0}) {
    const double T = simulate({500.0, P}, RandomInputs{}, p).max_temp();
    CHECK(T > last);
    last = T;
  }
  last = 1e300;
  for (double v : {200.0, 400.0, 600.0, 800.0, 1000.0}) {
    const double T = simulate({v, 160.0}, RandomInputs{}, p).max_temp();
    CHECK(T < last);
    last = T;
  }
}

TEST_CASE("invalid thermal inputs") {
  ModelParams p;
  CHECK_THROWS_AS(simulate({0.0, 100.0}, RandomInputs{}, p), Error);
  CHECK_THROWS_AS(simulate({500.0, -1.0}, RandomInputs{}, p), Error);
  p.spot_radius = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  SimGridConfig g;
  g.cells_x = 2;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("input packing round trip and effective density") {
  const DesignPoint d{321.0, 77.0};
  const RandomInputs z{600.0, 800.0, 115.0, 560.0};
  const auto xi = make_input(d, z);
  CHECK(design_of(xi).speed == d.speed);
  CHECK(design_of(xi).power == d.power);
  CHECK(random_of(xi).yield == z.yield);
  CHECK(random_of(xi).density == z.density);
  CHECK(effective_density(612.0) == doctest::Approx(4300.0));
}

TEST_CASE("stress proxy") {
  const ModelParams p;
  RandomInputs z;
  TemperatureSnapshot snap;
  snap.peak_field.assign(kStressSize, z.preheat);
  const auto flat = residual_stress(snap, z, p);
  CHECK(flat.sigma_max == 0.0);
  CHECK(std::all_of(flat.grid.begin(), flat.grid.end(), [](double s) { return s == 0.0; }));

  // E = 110 GPa, alpha_t = 1e-5, c_r = 0.8, rise of 1000 degC gives 880 MPa
  // before the yield cap.
  z.modulus = 110.0;
  z.yield = 825.0;
  snap.peak_field.assign(kStressSize, z.preheat);
  snap.peak_field[stress_index(3, 5)] = z.preheat + 1000.0;
  snap.peak_field[stress_index(4, 5)] = z.preheat + 500.0;
  const auto f = residual_stress(snap, z, p, StressParams{0.8});
  CHECK(f.grid[stress_index(3, 5)] == doctest::Approx(825.0));
  CHECK(f.grid[stress_index(4, 5)] == doctest::Approx(440.0));
  CHECK(f.sigma_max == doctest::Approx(825.0));
  z.yield = 900.0;
  CHECK(residual_stress(snap, z, p, StressParams{0.8}).sigma_max == doctest::Approx(880.0));
  CHECK_THROWS_AS(StressParams{1.5}.validate(), Error);
}

TEST_CASE("max_stress against a plain scan") {
  CHECK(max_stress(std::vector<double>(kStressSize, 0.0)) == 0.0);
  CHECK(max_stress(std::vector<double>{825.0}) == 825.0);
  Rng rng(3);
  std::vector<double> f(kStressSize);
  for (auto& x : f) x = rng.uniform(0.0, 900.0);
  double m = f[0];
  for (double x : f) m = x > m ? x : m;
  CHECK(max_stress(f) == m);
  CHECK_THROWS_AS(max_stress(std::vector<double>{}), Error);
}
