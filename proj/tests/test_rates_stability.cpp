#include <cmath>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "ppktp/errors.hpp"
#include "ppktp/rates_stability.hpp"

using namespace ppktp;
using namespace ppktp::rates_stability;

namespace {

const LossBudget kArm{0.8, 0.4, 1.0};

}  // namespace

TEST_SUITE("rates_stability") {
  TEST_CASE("accidentals and net coincidences") {
    CHECK(accidental_rate(1e5, 2e5, 55e-9) == doctest::Approx(1100.0));
    CoincidenceRecord r{1e5, 2e5, 5000, 55e-9, 1.0, 1.0, "HH"};
    CHECK(net_coincidences(r) == doctest::Approx(3900.0));
    r.raw_Hz = 500;
    CHECK(net_coincidences(r) == 0.0);
    CHECK_THROWS_AS(accidental_rate(-1, 1, 1e-9), InputError);
    r.window_s = 0;
    CHECK_THROWS_AS(r.validate(), InputError);
  }

  TEST_CASE("brightness chain") {
    const std::map<std::string, double> rates{{"HH", 2.0}, {"VV", 2.2}, {"HV", 0.036}, {"VH", 0.036}};
    const auto rep = brightness(rates, kArm, kArm);
    CHECK(rep.detected_kHz_per_mW == doctest::Approx(4.2).epsilon(1e-14));
    CHECK(rep.leakage_kHz_per_mW == doctest::Approx(0.072).epsilon(1e-14));
    CHECK(rep.pair_rate_kHz_per_mW == doctest::Approx(41.015625).epsilon(1e-14));
    const double spectral = spectral_rate(rep.pair_rate_kHz_per_mW, 0.553);
    CHECK(spectral == doctest::Approx(74.169).epsilon(1e-4));
    CHECK(length_scaling(spectral, 10, 25) == doctest::Approx(293.18).epsilon(1e-4));
  }

  TEST_CASE("brightness invariants") {
    const std::map<std::string, double> base{{"HH", 1.0}, {"VV", 1.5}};
    const auto a = brightness(base, kArm, kArm);
    // Lower efficiency means more pairs for the same detected rate.
    const auto b = brightness(base, LossBudget{0.8, 0.2, 1.0}, kArm);
    CHECK(b.pair_rate_kHz_per_mW == doctest::Approx(2 * a.pair_rate_kHz_per_mW));
    CHECK(a.pair_rate_kHz_per_mW >= a.detected_kHz_per_mW);
    // Leakage never adds to the brightness.
    auto leak = base;
    leak["HV"] = 0.5;
    CHECK(brightness(leak, kArm, kArm).pair_rate_kHz_per_mW == doctest::Approx(a.pair_rate_kHz_per_mW));
    CHECK_THROWS_AS(brightness(base, LossBudget{1.2, 1, 1}, kArm), InputError);
    CHECK_THROWS_AS(brightness(base, LossBudget{0, 1, 1}, kArm), InputError);
  }

  TEST_CASE("brightness from records uses a slope through the origin") {
    std::vector<CoincidenceRecord> recs;
    for (double p : {0.5, 1.0, 2.0}) {
      recs.push_back({1e4, 1e4, 2000 * p + 5.5, 55e-9, p, 1.0, "HH"});
      recs.push_back({1e4, 1e4, 2200 * p + 5.5, 55e-9, p, 1.0, "VV"});
    }
    const auto rep = brightness(recs, kArm, kArm);
    CHECK(rep.per_combination_kHz_per_mW.at("HH") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.per_combination_kHz_per_mW.at("VV") == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(rep.pair_rate_kHz_per_mW == doctest::Approx(41.015625).epsilon(1e-12));
    const auto j = report_to_json(rep);
    CHECK(j["pair_rate_kHz_per_mW"].get<double>() == doctest::Approx(41.015625));
  }

  TEST_CASE("spectral and length scaling") {
    CHECK(spectral_rate(10, 2) == 5);
    CHECK_THROWS_AS(spectral_rate(10, 0), InputError);
    CHECK(length_scaling(1, 10, 10) == 1);
    CHECK(length_scaling(1, 10, 40) == doctest::Approx(8.0));
    CHECK(length_scaling(length_scaling(3, 10, 25), 25, 10) == doctest::Approx(3.0));
  }

  TEST_CASE("phase fluctuation") {
    const auto f = phase_fluctuation(50, 406.2, 5, 0.1);
    CHECK(f.lambda_B_nm - f.lambda_A_nm == doctest::Approx(50));
    CHECK(1 / f.lambda_A_nm + 1 / f.lambda_B_nm == doctest::Approx(1 / 406.2).epsilon(1e-14));
    // Oracle: bisection on energy conservation.
    double lo = 700, hi = 812.4;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (1 / mid + 1 / (mid + 50) > 1 / 406.2 ? lo : hi) = mid;
    }
    const double dk = 2 * M_PI * (1 / lo - 1 / (lo + 50)) * 1e3;
    CHECK(f.phase_rad == doctest::Approx(std::sqrt(5.0) * dk * 0.1).epsilon(1e-10));
    CHECK(f.fraction_of_2pi == doctest::Approx(0.01692405751).epsilon(1e-9));
    CHECK(phase_fluctuation(0, 406.2, 5, 0.1).phase_rad == 0);
    CHECK(phase_fluctuation(50, 406.2, 20, 0.1).phase_rad == doctest::Approx(2 * f.phase_rad));
    CHECK(phase_fluctuation(50, 406.2, 5, 0.2).phase_rad == doctest::Approx(2 * f.phase_rad));
    CHECK_THROWS_AS(phase_fluctuation(50, 406.2, 0, 0.1), InputError);
  }

  TEST_CASE("coincidence CSV") {
    std::istringstream good(
        "# bench run\n"
        "combo,S_A,S_B,raw,window_ns,P_mW,duration_s\n"
        "HH,1e5,1e5,2550,55,1,10\n"
        "VV,1e5,1e5,2750,55,1,10\n");
    const auto recs = parse_coincidence_csv(good);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].combination == "HH");
    CHECK(recs[1].window_s == doctest::Approx(55e-9));
    CHECK(net_coincidences(recs[0]) == doctest::Approx(2000));

    auto line_of = [](const std::string& text) {
      std::istringstream in(text);
      try {
        parse_coincidence_csv(in);
      } catch (const InputError& e) {
        return e.line();
      }
      return -1;
    };
    CHECK(line_of("S_A,S_B,raw,window_ns,P_mW\n") == 1);
    CHECK(line_of("S_A,S_B,raw,window_ns,P_mW,duration_s\n1,2,3,4,5,6\n1,2,x,4,5,6\n") == 3);
    CHECK(line_of("S_A,S_B,raw,window_ns,P_mW,duration_s\n1,2,3,4,5\n") == 2);
    CHECK(line_of("S_A,S_B,raw,window_ns,P_mW,duration_s\n1,2,3,4,-5,6\n") == 2);
    std::istringstream empty("S_A,S_B,raw,window_ns,P_mW,duration_s\n");
    CHECK_THROWS_AS(parse_coincidence_csv(empty), InputError);
  }
}
