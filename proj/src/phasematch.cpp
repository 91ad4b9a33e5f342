#include "ppktp/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::phasematch {

using dispersion::Axis;
using dispersion::refractive_index;
using numerics::kPi;

std::string_view to_string(Plane plane) { return plane == Plane::xy ? "xy" : "xz"; }
std::string_view to_string(Polarization pol) { return pol == Polarization::H ? "H" : "V"; }
Polarization partner_of(Polarization pol) { return pol == Polarization::H ? Polarization::V : Polarization::H; }

void PumpSpec::validate() const {
  if (!(wavelength_nm > 0.0)) throw InputError("pump wavelength must be positive");
  if (!(bandwidth_GHz >= 0.0)) throw InputError("pump bandwidth must be non-negative");
  if (!(power_mW >= 0.0)) throw InputError("pump power must be non-negative");
}

double partner_wavelength_nm(double lambda_nm, const PumpSpec& pump) {
  const double inv = 1.0 / pump.wavelength_nm - 1.0 / lambda_nm;
  if (!(inv > 0.0)) {
    throw DomainError(fmt::format("no partner photon for {} nm with a {} nm pump", lambda_nm, pump.wavelength_nm));
  }
  return 1.0 / inv;
}

double photon_index(Polarization pol, Plane plane, double lambda_nm, double T_C, double theta_internal_rad,
                    const SellmeierSet& set) {
  const double lambda_um = lambda_nm * 1e-3;
  const Axis principal = pol == Polarization::H ? Axis::y : Axis::z;
  const double n_principal = refractive_index(principal, lambda_um, T_C, set);
  const bool in_plane = (pol == Polarization::H && plane == Plane::xy) || (pol == Polarization::V && plane == Plane::xz);
  if (!in_plane || theta_internal_rad == 0.0) return n_principal;
  // D lies in the plane, tilted from the principal axis towards x.
  const double n_x = refractive_index(Axis::x, lambda_um, T_C, set);
  const double c = std::cos(theta_internal_rad);
  const double s = std::sin(theta_internal_rad);
  return 1.0 / std::sqrt(c * c / (n_principal * n_principal) + s * s / (n_x * n_x));
}

double photon_wavenumber(Polarization pol, Plane plane, double lambda_nm, double T_C, double theta_internal_rad,
                         const SellmeierSet& set) {
  return 2.0 * kPi * photon_index(pol, plane, lambda_nm, T_C, theta_internal_rad, set) / (lambda_nm * 1e-3);
}

double pump_wavenumber(double T_C, const CrystalSpec& crystal, const PumpSpec& pump) {
  const double lambda_um = pump.wavelength_nm * 1e-3;
  return 2.0 * kPi * refractive_index(Axis::y, lambda_um, T_C, crystal.sellmeier) / lambda_um;
}

double collinear_mismatch(double lambda_H_nm, double T_C, const CrystalSpec& crystal, const PumpSpec& pump) {
  const double lambda_V_nm = partner_wavelength_nm(lambda_H_nm, pump);
  const auto& s = crystal.sellmeier;
  return pump_wavenumber(T_C, crystal, pump) - photon_wavenumber(Polarization::H, Plane::xy, lambda_H_nm, T_C, 0.0, s) -
         photon_wavenumber(Polarization::V, Plane::xy, lambda_V_nm, T_C, 0.0, s) - crystal.grating_wavenumber(T_C);
}

double solve_degenerate_collinear_T(const CrystalSpec& crystal, const PumpSpec& pump, double T_lo_C, double T_hi_C) {
  const double degenerate = 2.0 * pump.wavelength_nm;
  auto f = [&](double T) { return collinear_mismatch(degenerate, T, crystal, pump); };
  const double f_lo = f(T_lo_C);
  const double f_hi = f(T_hi_C);
  if (std::signbit(f_lo) == std::signbit(f_hi) && f_lo != 0.0 && f_hi != 0.0) {
    throw NoPhaseMatch(fmt::format("no phase match in range [{}, {}] C for degenerate collinear emission", T_lo_C,
                                   T_hi_C));
  }
  return numerics::find_root(f, T_lo_C, T_hi_C, 1e-7, f_lo, f_hi);
}

double external_from_internal(Polarization pol, Plane plane, double lambda_nm, double T_C, double theta_internal_rad,
                              const SellmeierSet& set) {
  const double n = photon_index(pol, plane, lambda_nm, T_C, theta_internal_rad, set);
  const double s = n * std::sin(theta_internal_rad);
  if (std::abs(s) >= 1.0) throw DomainError("total internal reflection at the exit face");
  return std::asin(s);
}

double internal_from_external(Polarization pol, Plane plane, double lambda_nm, double T_C, double theta_external_rad,
                              const SellmeierSet& set) {
  if (theta_external_rad == 0.0) return 0.0;
  const double target = std::sin(std::abs(theta_external_rad));
  auto g = [&](double t) { return photon_index(pol, plane, lambda_nm, T_C, t, set) * std::sin(t) - target; };
  const double hi = std::abs(theta_external_rad);
  const double t = numerics::find_root(g, 0.0, hi, 1e-16, -target, g(hi));
  return std::copysign(t, theta_external_rad);
}

NoncollinearMismatch noncollinear_mismatch(double lambda_signal_nm, Polarization signal, double theta_signal_internal_rad,
                                           double T_C, Plane plane, const CrystalSpec& crystal, const PumpSpec& pump) {
  const auto& set = crystal.sellmeier;
  const Polarization partner = partner_of(signal);
  NoncollinearMismatch m;
  m.partner_lambda_nm = partner_wavelength_nm(lambda_signal_nm, pump);
  const double theta_s = std::abs(theta_signal_internal_rad);
  m.signal_k = photon_wavenumber(signal, plane, lambda_signal_nm, T_C, theta_s, set);
  const double transverse = m.signal_k * std::sin(theta_s);
  if (transverse > 0.0) {
    auto g = [&](double t) {
      return photon_wavenumber(partner, plane, m.partner_lambda_nm, T_C, t, set) * std::sin(t) - transverse;
    };
    const double hi = 0.5 * std::numbers::pi;
    const double g_hi = g(hi);
    if (g_hi < 0.0) throw NoPhaseMatch("partner photon cannot balance the transverse momentum");
    m.partner_internal_rad = numerics::find_root(g, 0.0, hi, 1e-17, -transverse, g_hi);
  }
  m.partner_k = photon_wavenumber(partner, plane, m.partner_lambda_nm, T_C, m.partner_internal_rad, set);
  m.delta_k_long = pump_wavenumber(T_C, crystal, pump) - m.signal_k * std::cos(theta_s) -
                   m.partner_k * std::cos(m.partner_internal_rad) - crystal.grating_wavenumber(T_C);
  return m;
}

PhaseMatchPoint noncollinear_emission_angle(double lambda_signal_nm, double T_C, Plane plane,
                                            const CrystalSpec& crystal, const PumpSpec& pump, Polarization signal) {
  auto f = [&](double t) {
    return noncollinear_mismatch(lambda_signal_nm, signal, t, T_C, plane, crystal, pump).delta_k_long;
  };
  const double K = crystal.grating_wavenumber(T_C);
  const double f0 = f(0.0);
  double theta = 0.0;
  if (std::abs(f0) > 1e-9 * K) {
    if (f0 > 0.0) {
      throw NoPhaseMatch(fmt::format("collinear-only or no emission for {} nm at {} C on the {} plane",
                                     lambda_signal_nm, T_C, to_string(plane)));
    }
    const double t_max = numerics::deg2rad(kMaxInternalAngle_deg);
    const double f_max = f(t_max);
    if (f_max < 0.0) {
      throw ApproximationViolated(fmt::format("near-collinear approximation violated: {} nm at {} C needs more than "
                                              "{} deg internal angle",
                                              lambda_signal_nm, T_C, kMaxInternalAngle_deg));
    }
    theta = numerics::find_root(f, 0.0, t_max, 1e-16, f0, f_max);
  }
  const auto m = noncollinear_mismatch(lambda_signal_nm, signal, theta, T_C, plane, crystal, pump);
  const auto& set = crystal.sellmeier;
  const Polarization partner = partner_of(signal);
  const double ext_signal = external_from_internal(signal, plane, lambda_signal_nm, T_C, theta, set);
  const double ext_partner = -external_from_internal(partner, plane, m.partner_lambda_nm, T_C, m.partner_internal_rad, set);

  PhaseMatchPoint p;
  p.T_C = T_C;
  p.plane = plane;
  if (signal == Polarization::H) {
    p.lambda_H_nm = lambda_signal_nm;
    p.lambda_V_nm = m.partner_lambda_nm;
    p.theta_H_internal_rad = theta;
    p.theta_V_internal_rad = -m.partner_internal_rad;
    p.theta_H_deg = numerics::rad2deg(ext_signal);
    p.theta_V_deg = numerics::rad2deg(ext_partner);
  } else {
    p.lambda_V_nm = lambda_signal_nm;
    p.lambda_H_nm = m.partner_lambda_nm;
    p.theta_V_internal_rad = theta;
    p.theta_H_internal_rad = -m.partner_internal_rad;
    p.theta_V_deg = numerics::rad2deg(ext_signal);
    p.theta_H_deg = numerics::rad2deg(ext_partner);
  }
  return p;
}

MomentumResidual momentum_residual(const PhaseMatchPoint& point, const CrystalSpec& crystal, const PumpSpec& pump) {
  const auto& set = crystal.sellmeier;
  const double kH = photon_wavenumber(Polarization::H, point.plane, point.lambda_H_nm, point.T_C,
                                      std::abs(point.theta_H_internal_rad), set);
  const double kV = photon_wavenumber(Polarization::V, point.plane, point.lambda_V_nm, point.T_C,
                                      std::abs(point.theta_V_internal_rad), set);
  MomentumResidual r;
  r.longitudinal = pump_wavenumber(point.T_C, crystal, pump) - kH * std::cos(point.theta_H_internal_rad) -
                   kV * std::cos(point.theta_V_internal_rad) - crystal.grating_wavenumber(point.T_C);
  r.transverse = kH * std::sin(point.theta_H_internal_rad) + kV * std::sin(point.theta_V_internal_rad);
  return r;
}

double degenerate_temperature_for_angle(double theta_external_deg, Plane plane, const CrystalSpec& crystal,
                                        const PumpSpec& pump, double T_lo_C) {
  const double degenerate = 2.0 * pump.wavelength_nm;
  const double T_dc = solve_degenerate_collinear_T(crystal, pump);
  if (theta_external_deg <= 0.0) return T_dc;
  auto g = [&](double T) {
    try {
      return noncollinear_emission_angle(degenerate, T, plane, crystal, pump).theta_H_deg - theta_external_deg;
    } catch (const NoPhaseMatch&) {
      return -theta_external_deg;
    } catch (const ApproximationViolated&) {
      return 90.0;
    }
  };
  const double g_lo = g(T_lo_C);
  if (g_lo < 0.0) {
    throw NoPhaseMatch(fmt::format("degenerate angle {} deg not reached above {} C", theta_external_deg, T_lo_C));
  }
  return numerics::find_root(g, T_lo_C, T_dc, 1e-9, g_lo, -theta_external_deg);
}

SlopeEstimate partner_angle_slope(double T_C, Plane plane, const CrystalSpec& crystal, const PumpSpec& pump,
                                  double window_nm, int samples) {
  if (samples < 3) samples = 3;
  if (samples % 2 == 0) ++samples;
  const double degenerate = 2.0 * pump.wavelength_nm;
  SlopeEstimate out;
  for (double w = window_nm; w >= 0.01; w /= 2.0) {
    std::vector<double> dl, dtheta;
    bool ok = true;
    for (int i = 0; i < samples && ok; ++i) {
      const double detune = -w + 2.0 * w * i / (samples - 1);
      try {
        const auto p = noncollinear_emission_angle(degenerate + detune, T_C, plane, crystal, pump);
        dl.push_back(p.lambda_H_nm - p.lambda_V_nm);
        dtheta.push_back(numerics::deg2rad(std::abs(p.theta_H_deg) - std::abs(p.theta_V_deg)) * 1e6);
      } catch (const NoPhaseMatch&) {
        ok = false;
      } catch (const ApproximationViolated&) {
        ok = false;
      }
    }
    if (ok) {
      out.value = numerics::fit_line(dl, dtheta).slope;
      out.window_nm = w;
      return out;
    }
    out.warnings.push_back(fmt::format("window +/-{} nm partially unsolvable; shrinking", w));
  }
  throw NoPhaseMatch(fmt::format("no non-degenerate solutions around degeneracy at {} C", T_C));
}

SlopeEstimate angle_wavelength_slope(double T_C, Plane plane, const CrystalSpec& crystal, const PumpSpec& pump,
                                     double step_nm) {
  const double degenerate = 2.0 * pump.wavelength_nm;
  SlopeEstimate out;
  for (double h = step_nm; h >= 1e-6; h /= 4.0) {
    try {
      const double up = noncollinear_emission_angle(degenerate + h, T_C, plane, crystal, pump).theta_H_deg;
      const double down = noncollinear_emission_angle(degenerate - h, T_C, plane, crystal, pump).theta_H_deg;
      out.value = (up - down) / (2.0 * h);
      out.window_nm = h;
      return out;
    } catch (const NoPhaseMatch&) {
      out.warnings.push_back(fmt::format("step {} nm reaches the collinear limit; shrinking", h));
    }
  }
  throw NoPhaseMatch(fmt::format("angle-wavelength slope diverges at {} C (collinear limit)", T_C));
}

}  // namespace ppktp::phasematch
