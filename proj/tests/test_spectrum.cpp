#include <cmath>

#include <doctest.h>

#include "ppktp/errors.hpp"
#include "ppktp/spectrum.hpp"

using namespace ppktp;
using namespace ppktp::spectrum;
using dispersion::default_crystal;

TEST_SUITE("spectrum") {
  TEST_CASE("peak wavelength and bandwidth at the operating point") {
    const auto c = default_crystal();
    const PumpSpec p;
    // Independent scipy evaluation of the same model.
    CHECK(peak_wavelength(87.8, 0.85, Polarization::H, c, p) == doctest::Approx(812.3991219367105).epsilon(1e-9));
    CHECK(peak_wavelength(60.0, 0.85, Polarization::H, c, p) == doctest::Approx(806.2068878958099).epsilon(1e-9));
    CHECK(bandwidth(87.8, 0.85, Polarization::H, c, p) == doctest::Approx(0.5524823755080899).epsilon(1e-6));
  }

  TEST_CASE("centre wavelengths are energy conjugates") {
    const auto c = default_crystal();
    const PumpSpec p;
    for (double T : {50.0, 70.0, 87.8, 100.0}) {
      const auto [lh, lv] = center_wavelengths(T, 0.85, c, p);
      CHECK(1 / lh + 1 / lv == doctest::Approx(1 / p.wavelength_nm).epsilon(1e-13));
      CHECK(spectral_intensity(lh, T, 0.85, Polarization::H, c, p) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("spectral intensity is a unit-peak sinc squared") {
    const auto c = default_crystal();
    const PumpSpec p;
    for (double l = 805; l < 820; l += 0.37) {
      const double dk = longitudinal_mismatch(l, 87.8, 0.85, Polarization::H, c, p);
      const double x = dk * c.length_um(87.8) / 2;
      const double expect = x == 0 ? 1.0 : std::pow(std::sin(x) / x, 2);
      CHECK(spectral_intensity(l, 87.8, 0.85, Polarization::H, c, p) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("bandwidth against a sampled curve") {
    const auto c = default_crystal();
    const PumpSpec p;
    const auto curve = sample_spectrum(87.8, 0.85, Polarization::H, 810, 815, 0.0005, c, p);
    CHECK(curve_fwhm(curve) == doctest::Approx(bandwidth(87.8, 0.85, Polarization::H, c, p)).epsilon(1e-4));
    double peak = 0;
    for (const auto& s : curve.samples) peak = std::max(peak, s.intensity);
    CHECK(peak == doctest::Approx(1.0));
  }

  TEST_CASE("temperature tuning") {
    const auto c = default_crystal();
    const PumpSpec p;
    const auto r = tuning_slope(42, 122, 1, 0.85, c, p);
    CHECK(r.points.size() == 81);
    CHECK(r.slope_H == doctest::Approx(0.2280).epsilon(1e-3));
    CHECK(r.slope_V == doctest::Approx(-0.2292).epsilon(1e-3));
    // Oracle: endpoint secant of the same branch.
    const double secant = (r.points.back().lambda_H_nm - r.points.front().lambda_H_nm) / 80;
    CHECK(r.slope_H == doctest::Approx(secant).epsilon(0.02));
    for (const auto& pt : r.points) CHECK(1 / pt.lambda_H_nm + 1 / pt.lambda_V_nm == doctest::Approx(1 / 406.2));
    CHECK_THROWS(tuning_slope(42, 44, 1, 0.85, c, p));
  }

  TEST_CASE("branch crossing sits at the operating-point temperature") {
    const auto c = default_crystal();
    const PumpSpec p;
    const double tx = branch_crossing_temperature(0.85, c, p);
    const double ta = phasematch::degenerate_temperature_for_angle(0.85, Plane::xy, c, p);
    CHECK(std::abs(tx - ta) < 0.05);
  }

  TEST_CASE("bandwidth scan") {
    const auto c = default_crystal();
    const PumpSpec p;
    const auto pts = bandwidth_vs_T(80, 95, 5, 0.85, c, p);
    REQUIRE(pts.size() == 4);
    for (const auto& b : pts) {
      CHECK(b.fwhm_H_nm > 0.2);
      CHECK(b.fwhm_H_nm < 2.0);
    }
  }

  TEST_CASE("filter convolution") {
    FilterSpec f{812.0, 3.0, FilterShape::gaussian};
    CHECK(f.transmission(812.0) == doctest::Approx(1.0));
    CHECK(f.transmission(813.5) == doctest::Approx(0.5));
    FilterSpec box{812.0, 2.0, FilterShape::top_hat};
    CHECK(box.transmission(812.9) == 1.0);
    CHECK(box.transmission(813.1) == 0.0);
    FilterSpec bad{812.0, -1.0};
    CHECK_THROWS_AS(bad.validate(), InputError);

    SpectralCurve delta;
    for (int i = 0; i <= 400; ++i) delta.samples.push_back({800 + 0.05 * i, i == 240 ? 1.0 : 0.0});
    const auto out = convolve_with_filter(delta, f);
    CHECK(curve_fwhm(out) == doctest::Approx(3.0).epsilon(0.02));
  }

  TEST_CASE("dark mode is reported") {
    const auto c = default_crystal();
    const PumpSpec p;
    CHECK_THROWS_AS(center_wavelengths(87.8, 20.0, c, p), ApproximationViolated);
  }
}
