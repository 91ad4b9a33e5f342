#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "ppktp/dispersion.hpp"
#include "ppktp/errors.hpp"

using namespace ppktp;
using namespace ppktp::dispersion;

namespace {

// Hand transcription of the default set, kept separate from the INI parser.
double thermo(const double (&a)[4], double l) { return a[0] + a[1] / l + a[2] / (l * l) + a[3] / (l * l * l); }

double n_y_ref(double l, double T) {
  const double l2 = l * l;
  const double n0 = std::sqrt(2.09930 + 0.922683 / (1 - 0.0467695 / l2) - 0.0138408 * l2);
  const double a1[4] = {6.2897e-6, 6.3061e-6, -6.0629e-6, 2.6486e-6};
  const double a2[4] = {-0.14445e-8, 2.2244e-8, -3.5770e-8, 1.3470e-8};
  return n0 + thermo(a1, l) * (T - 25) + thermo(a2, l) * (T - 25) * (T - 25);
}

double n_z_ref(double l, double T) {
  const double l2 = l * l;
  const double n0 =
      std::sqrt(2.12725 + 1.18431 / (1 - 0.0514852 / l2) + 0.6603 / (1 - 100.00507 / l2) - 9.68956e-3 * l2);
  const double a1[4] = {9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6};
  const double a2[4] = {-1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8};
  return n0 + thermo(a1, l) * (T - 25) + thermo(a2, l) * (T - 25) * (T - 25);
}

double n_x_ref(double l, double T) {
  const double l2 = l * l;
  const double n0 = std::sqrt(3.29100 + 0.04140 / (l2 - 0.03978) + 9.35522 / (l2 - 31.45571));
  const double a1[4] = {0.1627e-5, 0.8416e-5, -0.5353e-5, 0.1717e-5};
  return n0 + thermo(a1, l) * (T - 20);
}

}  // namespace

TEST_SUITE("dispersion") {
  TEST_CASE("default set matches an independent transcription over the validity range") {
    const auto& set = builtin_set();
    for (int i = 0; i <= 24; ++i) {
      const double l = 0.40 + 0.05 * i;
      for (double T = 20; T <= 200; T += 15) {
        CHECK(refractive_index(Axis::x, l, T, set) == doctest::Approx(n_x_ref(l, T)).epsilon(1e-13));
        CHECK(refractive_index(Axis::y, l, T, set) == doctest::Approx(n_y_ref(l, T)).epsilon(1e-13));
        CHECK(refractive_index(Axis::z, l, T, set) == doctest::Approx(n_z_ref(l, T)).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("frozen reference indices") {
    // Values from a separate scipy implementation of the same formulas.
    const auto& set = builtin_set();
    CHECK(refractive_index(Axis::y, 0.8124, 95.0, set) == doctest::Approx(1.7565808837247912).epsilon(1e-12));
    CHECK(refractive_index(Axis::z, 0.8124, 95.0, set) == doctest::Approx(1.8454438596960083).epsilon(1e-12));
    CHECK(refractive_index(Axis::z, 0.4062, 60.0, set) == doctest::Approx(1.9627211479133897).epsilon(1e-12));
    CHECK(refractive_index(Axis::x, 0.8124, 25.0, set) == doctest::Approx(1.7475959811903954).epsilon(1e-12));
  }

  TEST_CASE("biaxial ordering and normal dispersion") {
    for (const auto& id : CoefficientLibrary::builtin().ids()) {
      const auto& set = builtin_set(id);
      for (double l = 0.41; l < 1.55; l += 0.07) {
        const double nx = refractive_index(Axis::x, l, 25, set);
        const double ny = refractive_index(Axis::y, l, 25, set);
        const double nz = refractive_index(Axis::z, l, 25, set);
        CHECK(nx < ny);
        CHECK(ny < nz);
        CHECK(refractive_index(Axis::z, l + 0.01, 25, set) < nz);
        CHECK(refractive_index(Axis::z, l, 80, set) > nz);
      }
    }
  }

  TEST_CASE("group index agrees with a five-point stencil") {
    const auto& set = builtin_set();
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      for (double l : {0.45, 0.8124, 1.2}) {
        const double h = 1e-3;
        auto n = [&](double x) { return refractive_index(a, x, 60, set); };
        const double d = (-n(l + 2 * h) + 8 * n(l + h) - 8 * n(l - h) + n(l - 2 * h)) / (12 * h);
        CHECK(group_index(a, l, 60, set) == doctest::Approx(n(l) - l * d).epsilon(1e-7));
        CHECK(group_index(a, l, 60, set) > n(l));
      }
    }
  }

  TEST_CASE("out-of-range wavelengths are rejected") {
    const auto& set = builtin_set();
    CHECK_THROWS_AS(refractive_index(Axis::y, 0.39, 25, set), DomainError);
    CHECK_THROWS_AS(refractive_index(Axis::y, 1.61, 25, set), DomainError);
    CHECK_THROWS_AS(group_index(Axis::y, 0.40, 25, set), DomainError);
    CHECK_NOTHROW(refractive_index(Axis::y, 0.40, 25, set));
  }

  TEST_CASE("thermal expansion and grating") {
    const auto c = default_crystal();
    CHECK(thermal_scale(25, c.sellmeier) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(thermal_scale(125, c.sellmeier) == doctest::Approx(1 + 6.7e-6 * 100 + 11e-9 * 1e4).epsilon(1e-15));
    CHECK(c.grating_wavenumber(25) == doctest::Approx(2 * M_PI / 10).epsilon(1e-15));
    CHECK(c.grating_wavenumber(100) < c.grating_wavenumber(25));
    CHECK(c.length_um(25) == doctest::Approx(1e4));
    CrystalSpec bad = c;
    bad.period_um = 0;
    CHECK_THROWS_AS(bad.validate(), InputError);
  }

  TEST_CASE("library lookups") {
    const auto lib = CoefficientLibrary::builtin();
    CHECK(lib.contains("fiorentino2007"));
    CHECK(lib.contains("kato2002"));
    try {
      lib.get("nope");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("fiorentino2007") != std::string::npos);
      CHECK(std::string(e.what()).find("kato2002") != std::string::npos);
    }
    CHECK(refractive_index(Axis::z, 0.8, 50, builtin_set("kato2002")) !=
          doctest::Approx(refractive_index(Axis::z, 0.8, 50, builtin_set())));
  }

  TEST_CASE("coefficient parsing") {
    const std::string text = R"(
[source]
id = flat
description = test
lambda_min_um = 0.3
lambda_max_um = 2.0
[expansion]
reference_C = 25
alpha = 0
beta = 0
[x]
form = pole
A = 4
B =
C =
D = 0
thermo_reference_C = 25
thermo_linear = 0 0 0 0
thermo_quadratic = 0 0 0 0
[y]
form = oscillator
A = 2.25
B =
C =
D = 0
thermo_reference_C = 25
thermo_linear = 1e-5 0 0 0
thermo_quadratic = 0 0 0 0
[z]
form = pole
A = 3
B = 1
C = 0
D = 0
thermo_reference_C = 25
thermo_linear = 0 0 0 0
thermo_quadratic = 0 0 0 0
)";
    const auto set = parse_sellmeier_set(text);
    CHECK(set.id == "flat");
    CHECK(refractive_index(Axis::x, 1.0, 25, set) == doctest::Approx(2.0));
    CHECK(refractive_index(Axis::y, 1.0, 35, set) == doctest::Approx(1.5 + 1e-4));
    CHECK(refractive_index(Axis::z, 0.5, 25, set) == doctest::Approx(std::sqrt(3 + 1 / 0.25)));

    std::string missing = text;
    missing.erase(missing.find("alpha = 0"), 10);
    CHECK_THROWS_AS(parse_sellmeier_set(missing), InputError);
    std::string garbage = text;
    garbage.replace(garbage.find("A = 2.25"), 8, "A = two");
    CHECK_THROWS_AS(parse_sellmeier_set(garbage), InputError);

    const auto dir = std::filesystem::temp_directory_path() / "ppktp_coeff_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "flat.ini") << text;
    auto lib = CoefficientLibrary::builtin();
    lib.load_directory(dir);
    CHECK(lib.contains("flat"));
    std::filesystem::remove_all(dir);
  }
}
