// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ppktp/cli.hpp"
#include "ppktp/emission_geometry.hpp"
#include "ppktp/phasematch.hpp"
#include "ppktp/polarization_optics.hpp"
#include "ppktp/rates_stability.hpp"
#include "ppktp/spectrum.hpp"
#include "ppktp/tomography.hpp"

using namespace ppktp;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Check {
  std::string text;
  bool ok;
};

struct Outcome {
  std::vector<Check> checks;
  void add(bool ok, std::string text) { checks.push_back({std::move(text), ok}); }
  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

Outcome degenerate_temperature() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double t = phasematch::solve_degenerate_collinear_T(dispersion::default_crystal(), phasematch::PumpSpec{});
  const double dt = seconds_since(t0);
  o.add(within(t, 98.98, 2.0), fmt::format("T_dc = {:.4f} C (target 98.98 +- 2)", t));
  o.add(dt < 1.0, fmt::format("runtime {:.3f} s", dt));
  return o;
}

Outcome geometry() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = dispersion::default_crystal();
  const phasematch::PumpSpec p;
  using phasematch::Plane;
  try {
    const double th = phasematch::noncollinear_emission_angle(812.4, 95.0, Plane::xy, c, p).theta_H_deg;
    o.add(within(th, 0.85, 0.05), fmt::format("angle at 95 C = {:.4f} deg", th));
  } catch (const std::exception& e) {
    o.add(false, fmt::format("angle at 95 C: {}", e.what()));
  }
  const double T = phasematch::degenerate_temperature_for_angle(0.85, Plane::xy, c, p);
  const double slope = phasematch::angle_wavelength_slope(T, Plane::xy, c, p).value;
  const double partner = phasematch::partner_angle_slope(T, Plane::xy, c, p).value;
  const auto ring = emission_geometry::ring_curve(T, 812.4, phasematch::Polarization::H, c, p);
  const double e = emission_geometry::ellipticity(ring);
  const double dt = seconds_since(t0);
  o.add(within(slope, 0.45, 0.10), fmt::format("dtheta/dlambda = {:.4f} deg/nm at {:.3f} C", slope, T));
  o.add(within(partner, 18.0, 5.0), fmt::format("partner slope = {:.3f} urad/nm", partner));
  o.add(within(e, 0.22, 0.03), fmt::format("ellipticity = {:.4f}", e));
  o.add(dt < 5.0, fmt::format("runtime {:.3f} s", dt));
  return o;
}

Outcome tuning_bandwidth() {
  Outcome o;
  const auto c = dispersion::default_crystal();
  const phasematch::PumpSpec p;
  const auto r = spectrum::tuning_slope(42, 122, 1, 0.85, c, p);
  o.add(within(std::abs(r.slope_H), 0.23, 0.03), fmt::format("|slope_H| = {:.4f} nm/C", std::abs(r.slope_H)));
  o.add(within(std::abs(r.slope_V), 0.23, 0.03), fmt::format("|slope_V| = {:.4f} nm/C", std::abs(r.slope_V)));
  const double T = phasematch::degenerate_temperature_for_angle(0.85, phasematch::Plane::xy, c, p);
  const double fwhm = spectrum::bandwidth(T, 0.85, phasematch::Polarization::H, c, p);
  o.add(within(fwhm, 0.553, 0.10), fmt::format("FWHM = {:.4f} nm", fwhm));
  const double tx = spectrum::branch_crossing_temperature(0.85, c, p);
  o.add(std::abs(tx - T) < 0.05, fmt::format("crossing {:.5f} C vs angle {:.5f} C", tx, T));
  return o;
}

Outcome rates() {
  Outcome o;
  namespace rs = rates_stability;
  const rs::LossBudget arm{0.8, 0.4, 1.0};
  const auto rep = rs::brightness({{"HH", 2.0}, {"VV", 2.2}, {"HV", 0.036}, {"VH", 0.036}}, arm, arm);
  const double spectral = rs::spectral_rate(rep.pair_rate_kHz_per_mW, 0.553);
  const double scaled = rs::length_scaling(spectral, 10, 25);
  o.add(within(rep.detected_kHz_per_mW, 4.2, 0.1), fmt::format("BR = {:.4f} kHz/mW", rep.detected_kHz_per_mW));
  o.add(within(rep.pair_rate_kHz_per_mW, 41, 1), fmt::format("loss corrected = {:.4f}", rep.pair_rate_kHz_per_mW));
  o.add(within(spectral, 74, 2), fmt::format("spectral = {:.4f}", spectral));
  o.add(within(scaled, 293, 5), fmt::format("25 mm = {:.4f}", scaled));
  return o;
}

Outcome stability() {
  Outcome o;
  const auto f = rates_stability::phase_fluctuation(50, 406.2, 5, 0.1);
  o.add(within(f.fraction_of_2pi, 0.017, 0.001), fmt::format("dphi/2pi = {:.6f}", f.fraction_of_2pi));
  const auto z = rates_stability::phase_fluctuation(0, 406.2, 5, 0.1);
  o.add(z.phase_rad == 0.0, fmt::format("zero split gives {}", z.phase_rad));
  return o;
}

Outcome tomography_suite() {
  Outcome o;
  namespace tm = tomography;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    Eigen::MatrixXcd a(4, 1 + i % 4);
    for (int r = 0; r < a.rows(); ++r)
      for (int k = 0; k < a.cols(); ++k) a(r, k) = Complex(g(rng), g(rng));
    Matrix4c rho = a * a.adjoint();
    rho /= rho.trace().real();
    const auto rec = tm::simulate_counts(TwoQubitDensityMatrix(rho), 1000, tm::Noise::none);
    worst = std::max(worst, (tm::mle_reconstruct(rec).rho.matrix() - rho).norm());
  }
  o.add(worst < 1e-6, fmt::format("round trip worst Frobenius error {:.2e}", worst));

  double werner = 0;
  for (int i = 0; i < 20; ++i) {
    const double p = (i + 0.5) / 20;
    const auto rec = tm::simulate_counts(TwoQubitDensityMatrix(werner_state(p)), 1000, tm::Noise::none);
    werner = std::max(werner, std::abs(tm::concurrence(tm::mle_reconstruct(rec).rho) - std::max(0.0, (3 * p - 1) / 2)));
  }
  o.add(werner < 1e-9, fmt::format("Werner concurrence worst error {:.2e}", werner));

  int physical = 0, total = 0;
  for (auto lik : {tm::Likelihood::gaussian, tm::Likelihood::poisson}) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Eigen::MatrixXcd a(4, 2);
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 2; ++k) a(r, k) = Complex(g(rng), g(rng));
      Matrix4c rho = a * a.adjoint();
      rho /= rho.trace().real();
      const auto rec = tm::simulate_counts(TwoQubitDensityMatrix(rho), 100, tm::Noise::poisson, seed);
      tm::MleOptions opt;
      opt.likelihood = lik;
      opt.seed = seed;
      ++total;
      try {
        const auto m = tm::mle_reconstruct(rec, opt);
        if (TwoQubitDensityMatrix::is_valid(m.rho.matrix())) ++physical;
      } catch (const std::exception&) {
      }
    }
  }
  o.add(physical == total, fmt::format("Poisson N=100: {}/{} physical", physical, total));
  const double dt = seconds_since(t0);
  o.add(dt < 60.0, fmt::format("runtime {:.2f} s", dt));
  return o;
}

Outcome hom() {
  Outcome o;
  namespace po = polarization_optics;
  po::HomParams dip{pi, 812.4, 812.4, 0.553, po::EnvelopeShape::gaussian};
  const auto trace = po::hom_scan(dip, 45, 45, -20000, 20000, 10);
  double pmin = 1, pmax = 0;
  for (const auto& t : trace) pmin = std::min(pmin, t.probability), pmax = std::max(pmax, t.probability);
  const double vis = (pmax - pmin) / (pmax + pmin);
  o.add(std::abs(vis - 1) < 1e-9, fmt::format("dip visibility {:.12f}", vis));

  double mirror = 0;
  for (double phi : {0.0, 0.4, pi / 2, 2.0}) {
    for (auto shape : {po::EnvelopeShape::gaussian, po::EnvelopeShape::sinc2}) {
      po::HomParams a{phi, 812.0, 812.8, 0.553, shape}, b = a;
      b.phase_rad = phi + pi;
      const auto ta = po::hom_scan(a, 45, 45, -6000, 6000, 10);
      const auto tb = po::hom_scan(b, 45, 45, -6000, 6000, 10);
      for (std::size_t i = 0; i < ta.size(); ++i)
        mirror = std::max(mirror, std::abs(ta[i].probability + tb[i].probability - 0.5));
    }
  }
  o.add(mirror < 1e-12, fmt::format("mirror identity worst deviation {:.2e}", mirror));

  po::HomParams beat{0, 812.0, 812.8, 0.553, po::EnvelopeShape::gaussian};
  const double w = po::beat_angular_frequency(beat.lambda_A_nm, beat.lambda_B_nm);
  const auto bt = po::hom_scan(beat, 45, 45, -3000, 3000, 0.5);
  std::vector<double> zeros;
  for (std::size_t i = 1; i < bt.size(); ++i) {
    const double u = bt[i - 1].probability - 0.25, v = bt[i].probability - 0.25;
    if (u * v < 0) zeros.push_back(bt[i - 1].x + 0.5 * u / (u - v));
  }
  const double period = zeros.size() >= 2 ? 2 * (zeros.back() - zeros.front()) / (zeros.size() - 1) : 0;
  const double analytic = 2 * pi / w;
  o.add(std::abs(period / analytic - 1) < 0.01, fmt::format("beat period {:.2f} fs vs {:.2f} fs", period, analytic));

  // Fringe phase from quadrature projections over a symmetric window; the
  // even envelope keeps the quadrant, so n*pi/2 settings must land on n*pi/2.
  std::vector<double> phases;
  std::vector<std::vector<po::TracePoint>> traces;
  for (int n = 0; n < 4; ++n) {
    po::HomParams p = beat;
    p.phase_rad = n * pi / 2;
    traces.push_back(po::hom_scan(p, 45, 45, -6000, 6000, 1));
    double c = 0, s = 0;
    for (const auto& q : traces.back()) {
      c += (q.probability - 0.25) * std::cos(w * q.x);
      s -= (q.probability - 0.25) * std::sin(w * q.x);
    }
    phases.push_back(std::atan2(s, c));
  }
  bool ordered = true;
  for (int n = 0; n < 4; ++n) ordered = ordered && std::abs(std::remainder(phases[n] - n * pi / 2, 2 * pi)) < 1e-6;
  double closest = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double d = 0;
      for (std::size_t k = 0; k < traces[i].size(); ++k)
        d = std::max(d, std::abs(traces[i][k].probability - traces[j][k].probability));
      closest = std::min(closest, d);
    }
  o.add(ordered && closest > 0.05,
        fmt::format("fringe phases {:.4f} {:.4f} {:.4f} {:.4f} rad, min trace separation {:.3f}", phases[0],
                    phases[1], phases[2], phases[3], closest));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "ppktp_acceptance_determinism";
  fs::remove_all(dir);
  const std::vector<std::vector<std::string>> runs{
      {"tdc"},
      {"sweep", "tuning"},
      {"sweep", "bandwidth", "--t-step", "5"},
      {"sweep", "angle", "--t-step", "5"},
      {"sweep", "ring"},
      {"sweep", "cross-section", "--y-step", "0.05"},
      {"sweep", "hom"},
      {"sweep", "stability"},
      {"tomo", "--noise", "poisson", "--n", "100", "--simulate", "werner"},
      {"rates"}};
  std::map<std::string, std::string> first;
  bool ok = true;
  int files = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (auto args : runs) {
      args.insert(args.end(), {"--out", dir.string(), "--seed", "7"});
      std::ostringstream out, err;
      if (cli::run(args, out, err) != 0) {
        ok = false;
        o.add(false, fmt::format("'{}' failed: {}", args[0], err.str()));
      }
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (pass == 0) {
        first[name] = slurp(entry.path());
      } else {
        ++files;
        if (slurp(entry.path()) != first[name]) {
          ok = false;
          o.add(false, fmt::format("{} differs between runs", name));
        }
      }
    }
  }
  o.add(ok && files > 0, fmt::format("{} output files byte identical", files));
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"degenerate collinear temperature", degenerate_temperature},
      {"non-collinear geometry", geometry},
      {"tuning and bandwidth", tuning_bandwidth},
      {"rates pipeline", rates},
      {"stability formula", stability},
      {"tomography properties", tomography_suite},
      {"HOM model", hom},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.add(false, fmt::format("threw: {}", e.what()));
    }
    std::string detail;
    for (const auto& c : o.checks) detail += fmt::format("{}{}{}", detail.empty() ? "" : "; ", c.ok ? "" : "!", c.text);
    std::cout << fmt::format("{} {}. {}: {}\n", o.ok() ? "PASS" : "FAIL", i + 1, criteria[i].first, detail);
    if (!o.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
