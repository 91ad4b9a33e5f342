#include "ppktp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::spectrum {

namespace {

constexpr double kSearchHalfSpan_nm = 40.0;
constexpr double kSearchStep_nm = 0.25;

double sinc_squared(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

}  // namespace

void FilterSpec::validate() const {
  if (!(fwhm_nm > 0.0)) throw InputError("filter FWHM must be positive");
}

double FilterSpec::transmission(double lambda_nm) const {
  const double d = lambda_nm - center_nm;
  if (shape == FilterShape::top_hat) return std::abs(d) <= 0.5 * fwhm_nm ? 1.0 : 0.0;
  return std::exp(-4.0 * std::log(2.0) * d * d / (fwhm_nm * fwhm_nm));
}

double longitudinal_mismatch(double lambda_nm, double T_C, double theta_mode_deg, Polarization pol,
                             const CrystalSpec& crystal, const PumpSpec& pump, Plane plane) {
  const double theta_int = phasematch::internal_from_external(pol, plane, lambda_nm, T_C,
                                                              numerics::deg2rad(std::abs(theta_mode_deg)),
                                                              crystal.sellmeier);
  if (theta_int > numerics::deg2rad(phasematch::kMaxInternalAngle_deg)) {
    throw ApproximationViolated(fmt::format("mode angle {} deg exceeds the near-collinear range", theta_mode_deg));
  }
  return phasematch::noncollinear_mismatch(lambda_nm, pol, theta_int, T_C, plane, crystal, pump).delta_k_long;
}

double spectral_intensity(double lambda_nm, double T_C, double theta_mode_deg, Polarization pol,
                          const CrystalSpec& crystal, const PumpSpec& pump, Plane plane) {
  const double dk = longitudinal_mismatch(lambda_nm, T_C, theta_mode_deg, pol, crystal, pump, plane);
  return sinc_squared(0.5 * dk * crystal.length_um(T_C));
}

SpectralCurve sample_spectrum(double T_C, double theta_mode_deg, Polarization pol, double lambda_min_nm,
                              double lambda_max_nm, double step_nm, const CrystalSpec& crystal,
                              const PumpSpec& pump) {
  if (!(step_nm > 0.0) || !(lambda_max_nm > lambda_min_nm)) throw InputError("empty wavelength grid");
  SpectralCurve curve;
  curve.pol = pol;
  curve.T_C = T_C;
  curve.theta_mode_deg = theta_mode_deg;
  const auto n = static_cast<std::size_t>(std::floor((lambda_max_nm - lambda_min_nm) / step_nm + 1e-9)) + 1;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda_min_nm + step_nm * static_cast<double>(i);
    const double v = spectral_intensity(l, T_C, theta_mode_deg, pol, crystal, pump);
    curve.samples.push_back({l, v});
    peak = std::max(peak, v);
  }
  if (peak > 0.0) {
    for (auto& s : curve.samples) s.intensity /= peak;
  }
  return curve;
}

double peak_wavelength(double T_C, double theta_mode_deg, Polarization pol, const CrystalSpec& crystal,
                       const PumpSpec& pump) {
  const double center = 2.0 * pump.wavelength_nm;
  auto dk = [&](double l) { return longitudinal_mismatch(l, T_C, theta_mode_deg, pol, crystal, pump); };

  const int n = static_cast<int>(2.0 * kSearchHalfSpan_nm / kSearchStep_nm);
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_abs = std::numeric_limits<double>::infinity();
  double grid_min = center;
  double grid_min_val = std::numeric_limits<double>::infinity();
  double prev_l = center - kSearchHalfSpan_nm;
  double prev_v = dk(prev_l);
  for (int i = 1; i <= n; ++i) {
    const double l = center - kSearchHalfSpan_nm + kSearchStep_nm * i;
    const double v = dk(l);
    if (std::abs(v) < grid_min_val) {
      grid_min_val = std::abs(v);
      grid_min = l;
    }
    if (std::signbit(v) != std::signbit(prev_v) || v == 0.0) {
      const double root = numerics::find_root(dk, prev_l, l, 1e-10, prev_v, v);
      if (std::abs(root - center) < best_abs) {
        best_abs = std::abs(root - center);
        best = root;
      }
    }
    prev_l = l;
    prev_v = v;
  }
  if (!std::isnan(best)) return best;

  // No exact phase match: the peak is where |Δk| is smallest.
  const auto [l_min, dk_min] = numerics::minimize([&](double l) { return std::abs(dk(l)); },
                                                  grid_min - kSearchStep_nm, grid_min + kSearchStep_nm);
  if (sinc_squared(0.5 * dk_min * crystal.length_um(T_C)) < 1e-6) {
    throw NoPhaseMatch(fmt::format("mode dark at this T ({} C, {} deg)", T_C, theta_mode_deg));
  }
  return l_min;
}

std::pair<double, double> center_wavelengths(double T_C, double theta_mode_deg, const CrystalSpec& crystal,
                                             const PumpSpec& pump) {
  const double lambda_H = peak_wavelength(T_C, theta_mode_deg, Polarization::H, crystal, pump);
  return {lambda_H, phasematch::partner_wavelength_nm(lambda_H, pump)};
}

double bandwidth(double T_C, double theta_mode_deg, Polarization pol, const CrystalSpec& crystal,
                 const PumpSpec& pump) {
  const double c = peak_wavelength(T_C, theta_mode_deg, pol, crystal, pump);
  auto f = [&](double l) { return spectral_intensity(l, T_C, theta_mode_deg, pol, crystal, pump) - 0.5; };
  const double f_c = f(c);
  if (f_c <= 0.0) throw NoPhaseMatch("spectral peak below half maximum");
  auto crossing = [&](double direction) {
    constexpr double step = 0.02;
    double inner = c;
    for (int i = 1; i <= 500; ++i) {
      const double outer = c + direction * step * i;
      const double v = f(outer);
      if (v < 0.0) return numerics::find_root(f, inner, outer, 1e-9, f(inner), v);
      inner = outer;
    }
    throw NumericalFailure("half-maximum crossing not found within 10 nm");
  };
  return crossing(+1.0) - crossing(-1.0);
}

TuningResult tuning_slope(double T_min_C, double T_max_C, double T_step_C, double theta_mode_deg,
                          const CrystalSpec& crystal, const PumpSpec& pump) {
  if (!(T_step_C > 0.0)) throw InputError("temperature step must be positive");
  TuningResult r;
  std::vector<double> Ts, lh, lv;
  const int n = static_cast<int>(std::floor((T_max_C - T_min_C) / T_step_C + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double T = T_min_C + T_step_C * i;
    try {
      const auto [h, v] = center_wavelengths(T, theta_mode_deg, crystal, pump);
      r.points.push_back({T, h, v});
      Ts.push_back(T);
      lh.push_back(h);
      lv.push_back(v);
    } catch (const NoPhaseMatch&) {
    } catch (const DomainError&) {
    }
  }
  if (Ts.size() < 5) {
    throw NoPhaseMatch(fmt::format("only {} solvable temperatures in [{}, {}] C; need 5", Ts.size(), T_min_C, T_max_C));
  }
  const auto fh = numerics::fit_line(Ts, lh);
  const auto fv = numerics::fit_line(Ts, lv);
  r.slope_H = fh.slope;
  r.slope_V = fv.slope;
  r.residual_rms_H = fh.residual_rms;
  r.residual_rms_V = fv.residual_rms;
  return r;
}

std::vector<BandwidthPoint> bandwidth_vs_T(double T_min_C, double T_max_C, double T_step_C, double theta_mode_deg,
                                           const CrystalSpec& crystal, const PumpSpec& pump) {
  if (!(T_step_C > 0.0)) throw InputError("temperature step must be positive");
  std::vector<BandwidthPoint> out;
  const int n = static_cast<int>(std::floor((T_max_C - T_min_C) / T_step_C + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double T = T_min_C + T_step_C * i;
    out.push_back({T, bandwidth(T, theta_mode_deg, Polarization::H, crystal, pump),
                   bandwidth(T, theta_mode_deg, Polarization::V, crystal, pump)});
  }
  return out;
}

double branch_crossing_temperature(double theta_mode_deg, const CrystalSpec& crystal, const PumpSpec& pump,
                                   double T_lo_C, double T_hi_C) {
  const double degenerate = 2.0 * pump.wavelength_nm;
  auto g = [&](double T) { return peak_wavelength(T, theta_mode_deg, Polarization::H, crystal, pump) - degenerate; };
  constexpr double step = 2.0;
  double prev_T = T_lo_C;
  double prev = g(prev_T);
  for (double T = T_lo_C + step; T <= T_hi_C + 1e-9; T += step) {
    const double v = g(T);
    if (std::signbit(v) != std::signbit(prev) || v == 0.0) return numerics::find_root(g, prev_T, T, 1e-7, prev, v);
    prev_T = T;
    prev = v;
  }
  throw NoPhaseMatch(fmt::format("branches do not cross in [{}, {}] C", T_lo_C, T_hi_C));
}

SpectralCurve convolve_with_filter(const SpectralCurve& curve, const FilterSpec& filter) {
  filter.validate();
  SpectralCurve out = curve;
  const auto& s = curve.samples;
  if (s.size() < 2) return out;
  const double step = s[1].lambda_nm - s[0].lambda_nm;
  const auto n = static_cast<long>(s.size());
  std::vector<double> kernel;  // kernel[k] for offset k * step, k >= 0 (symmetric)
  for (long k = 0; k < n; ++k) {
    const double t = filter.transmission(filter.center_nm + k * step);
    if (k > 0 && t < 1e-14) break;
    kernel.push_back(t);
  }
  const long half = static_cast<long>(kernel.size()) - 1;
  double peak = 0.0;
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = -half; k <= half; ++k) {
      const long j = i - k;
      if (j < 0 || j >= n) continue;
      acc += s[j].intensity * kernel[std::abs(k)];
    }
    out.samples[i].intensity = acc;
    peak = std::max(peak, acc);
  }
  if (peak > 0.0) {
    for (auto& x : out.samples) x.intensity /= peak;
  }
  return out;
}

double curve_fwhm(const SpectralCurve& curve) {
  const auto& s = curve.samples;
  if (s.size() < 3) throw NumericalFailure("curve too short for a FWHM");
  const auto it = std::max_element(s.begin(), s.end(),
                                   [](const auto& a, const auto& b) { return a.intensity < b.intensity; });
  const double half = 0.5 * it->intensity;
  const auto ip = static_cast<std::size_t>(it - s.begin());
  auto interp = [&](std::size_t inside, std::size_t outside) {
    const double t = (s[inside].intensity - half) / (s[inside].intensity - s[outside].intensity);
    return s[inside].lambda_nm + t * (s[outside].lambda_nm - s[inside].lambda_nm);
  };
  std::size_t r = ip;
  while (r + 1 < s.size() && s[r + 1].intensity >= half) ++r;
  std::size_t l = ip;
  while (l > 0 && s[l - 1].intensity >= half) --l;
  if (r + 1 >= s.size() || l == 0) throw NumericalFailure("half maximum not reached inside the sampled range");
  return interp(r, r + 1) - interp(l, l - 1);
}

}  // namespace ppktp::spectrum
