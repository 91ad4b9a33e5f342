#include "ppktp/polarization_optics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::polarization_optics {

using namespace numerics;

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kSpeedOfLight_nm_per_fs = kSpeedOfLight_um_per_fs * 1e3;

Matrix2c rotation(double angle_rad) {
  Matrix2c r;
  r << std::cos(angle_rad), -std::sin(angle_rad), std::sin(angle_rad), std::cos(angle_rad);
  return r;
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * kPi);
  if (phi <= -kPi) phi += 2.0 * kPi;
  return phi;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(fmt::format("{} must be positive, got {}", what, v));
}

void check_params(const HomParams& p) {
  require_positive(p.lambda_A_nm, "lambda_A_nm");
  require_positive(p.lambda_B_nm, "lambda_B_nm");
  require_positive(p.bandwidth_nm, "bandwidth_nm");
}

std::vector<double> grid(double lo, double hi, double step, const char* what) {
  if (!(step > 0.0) || !(hi >= lo)) throw InputError(fmt::format("invalid {} grid [{}, {}] step {}", what, lo, hi, step));
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + static_cast<double>(i) * step;
  return xs;
}

}  // namespace

JonesMatrix retarder(double retardance_rad, double angle_deg) {
  const double a = deg2rad(angle_deg);
  Matrix2c d = Matrix2c::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = std::exp(kI * retardance_rad);
  return rotation(a) * d * rotation(-a);
}

JonesMatrix waveplate(WaveplateKind kind, double angle_deg) {
  return retarder(kind == WaveplateKind::HWP ? kPi : kPi / 2.0, angle_deg);
}

JonesMatrix linear_polarizer(double angle_deg) {
  const double a = deg2rad(angle_deg);
  Vector2c e(std::cos(a), std::sin(a));
  return e * e.adjoint();
}

JonesMatrix phase_shifter_matrix(double hwp_angle_deg) {
  return waveplate(WaveplateKind::QWP, 45.0) * waveplate(WaveplateKind::HWP, hwp_angle_deg) *
         waveplate(WaveplateKind::QWP, 45.0);
}

double phase_shifter(double hwp_angle_deg) {
  const JonesMatrix m = phase_shifter_matrix(hwp_angle_deg);
  return wrap_phase(std::arg(m(1, 1)) - std::arg(m(0, 0)));
}

double hwp_angle_for_phase(double phase_rad) {
  double theta = rad2deg(wrap_phase(phase_rad) + kPi) / 4.0;
  theta = std::fmod(theta, 90.0);
  return theta < 0.0 ? theta + 90.0 : theta;
}

TwoPhotonState output_state(double phase_rad, double lambda_A_nm, double lambda_B_nm, double bandwidth_nm,
                            double delay_fs) {
  require_positive(lambda_A_nm, "lambda_A_nm");
  require_positive(lambda_B_nm, "lambda_B_nm");
  require_positive(bandwidth_nm, "bandwidth_nm");
  return {phi_state(phase_rad), lambda_A_nm, lambda_B_nm, bandwidth_nm, delay_fs};
}

double compensator_delay(double T_C, const dispersion::CrystalSpec& crystal, double lambda_nm) {
  using dispersion::Axis;
  const double lambda_um = lambda_nm * 1e-3;
  const double ng_y = dispersion::group_index(Axis::y, lambda_um, T_C, crystal.sellmeier);
  const double ng_z = dispersion::group_index(Axis::z, lambda_um, T_C, crystal.sellmeier);
  return (ng_y - ng_z) * crystal.length_um(T_C);
}

double odl_delay_fs(double odl_position_um, double compensation_offset_um) {
  return (odl_position_um - compensation_offset_um) / kSpeedOfLight_um_per_fs;
}

double beat_angular_frequency(double lambda_A_nm, double lambda_B_nm) {
  require_positive(lambda_A_nm, "lambda_A_nm");
  require_positive(lambda_B_nm, "lambda_B_nm");
  return 2.0 * kPi * kSpeedOfLight_nm_per_fs * (1.0 / lambda_A_nm - 1.0 / lambda_B_nm);
}

double envelope(double delay_fs, const HomParams& params) {
  check_params(params);
  const double lambda = 0.5 * (params.lambda_A_nm + params.lambda_B_nm);
  const double dnu = kSpeedOfLight_nm_per_fs * params.bandwidth_nm / (lambda * lambda);  // 1/fs
  if (params.envelope == EnvelopeShape::gaussian) {
    const double x = kPi * dnu * delay_fs;
    return std::exp(-x * x / (4.0 * std::log(2.0)));
  }
  // FWHM of sinc²(πν/ν₀) is 0.88589 ν₀; its transform is a triangle of half-width 1/ν₀.
  constexpr double kSinc2FwhmFactor = 0.8858929413789047;
  return std::max(0.0, 1.0 - std::abs(delay_fs) * dnu / kSinc2FwhmFactor);
}

Matrix4c effective_density(const HomParams& params, double delay_fs) {
  const double v = envelope(delay_fs, params);
  const double phase = params.phase_rad + beat_angular_frequency(params.lambda_A_nm, params.lambda_B_nm) * delay_fs;
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 3) = 0.5 * v * std::exp(-kI * phase);
  rho(3, 0) = std::conj(rho(0, 3));
  return rho;
}

double coincidence_probability(const Matrix4c& rho, double lp_A_deg, double lp_B_deg) {
  const double a = deg2rad(lp_A_deg);
  const double b = deg2rad(lp_B_deg);
  Vector4c psi;
  psi << std::cos(a) * std::cos(b), std::cos(a) * std::sin(b), std::sin(a) * std::cos(b), std::sin(a) * std::sin(b);
  return std::max(0.0, (psi.adjoint() * rho * psi)(0, 0).real());
}

std::vector<TracePoint> hom_scan(const HomParams& params, double lp_A_deg, double lp_B_deg, double delay_min_fs,
                                 double delay_max_fs, double delay_step_fs) {
  check_params(params);
  std::vector<TracePoint> out;
  for (double tau : grid(delay_min_fs, delay_max_fs, delay_step_fs, "delay"))
    out.push_back({tau, coincidence_probability(effective_density(params, tau), lp_A_deg, lp_B_deg)});
  return out;
}

std::vector<TracePoint> correlation_scan(const Matrix4c& rho, double lp_A_deg, double lp_B_min_deg,
                                         double lp_B_max_deg, double lp_B_step_deg) {
  std::vector<TracePoint> out;
  for (double b : grid(lp_B_min_deg, lp_B_max_deg, lp_B_step_deg, "analyzer angle"))
    out.push_back({b, coincidence_probability(rho, lp_A_deg, b)});
  return out;
}

std::vector<TracePoint> correlation_scan(const HomParams& params, double delay_fs, double lp_A_deg,
                                         double lp_B_min_deg, double lp_B_max_deg, double lp_B_step_deg) {
  return correlation_scan(effective_density(params, delay_fs), lp_A_deg, lp_B_min_deg, lp_B_max_deg,
                          lp_B_step_deg);
}

double trace_visibility(const std::vector<TracePoint>& trace) {
  if (trace.empty()) throw InputError("empty trace");
  auto [lo, hi] = std::minmax_element(trace.begin(), trace.end(),
                                      [](const TracePoint& a, const TracePoint& b) { return a.probability < b.probability; });
  const double sum = hi->probability + lo->probability;
  if (sum <= 0.0) throw NumericalFailure("trace has no counts");
  return (hi->probability - lo->probability) / sum;
}

}  // namespace ppktp::polarization_optics
