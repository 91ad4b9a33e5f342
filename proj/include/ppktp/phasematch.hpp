#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ppktp/dispersion.hpp"

namespace ppktp::phasematch {

using dispersion::CrystalSpec;
using dispersion::SellmeierSet;

/// Principal plane containing the pump (x) and the emitted photons.
enum class Plane { xy, xz };
/// H is polarized along y, V along z.
enum class Polarization { H, V };

std::string_view to_string(Plane plane);
std::string_view to_string(Polarization pol);
Polarization partner_of(Polarization pol);

struct PumpSpec {
  double wavelength_nm = 406.2;
  double bandwidth_GHz = 0.2;
  double power_mW = 1.0;

  /// Throws InputError when any invariant is violated.
  void validate() const;
};

/// A solution of the vector QPM conditions on a principal plane. Angles are
/// external (after refraction at the exit face), signed, in degrees.
struct PhaseMatchPoint {
  double lambda_H_nm = 0.0;
  double lambda_V_nm = 0.0;
  double theta_H_deg = 0.0;
  double theta_V_deg = 0.0;
  double T_C = 0.0;
  Plane plane = Plane::xy;
  // Internal propagation angles, signed like the external ones.
  double theta_H_internal_rad = 0.0;
  double theta_V_internal_rad = 0.0;
};

/// Partner wavelength from energy conservation 1/λp = 1/λ + 1/λ'.
double partner_wavelength_nm(double lambda_nm, const PumpSpec& pump);

/// Index seen by a photon of `pol` propagating at internal angle θ inside
/// `plane`. The polarization lying in the plane sees the index-ellipse mix of
/// its principal axis and x; the other sees its principal index.
double photon_index(Polarization pol, Plane plane, double lambda_nm, double T_C, double theta_internal_rad,
                    const SellmeierSet& set);

/// Wavenumber 2πn/λ in 1/µm.
double photon_wavenumber(Polarization pol, Plane plane, double lambda_nm, double T_C,
                         double theta_internal_rad, const SellmeierSet& set);
double pump_wavenumber(double T_C, const CrystalSpec& crystal, const PumpSpec& pump);

/// Collinear mismatch Δk = k_p − k_H − k_V − K (1/µm) with λ_V from energy
/// conservation.
double collinear_mismatch(double lambda_H_nm, double T_C, const CrystalSpec& crystal, const PumpSpec& pump);

/// Temperature at which the degenerate (λ_H = λ_V = 2λp) collinear process
/// is phase matched. Throws NoPhaseMatch if Δk does not change sign in range.
double solve_degenerate_collinear_T(const CrystalSpec& crystal, const PumpSpec& pump, double T_lo_C = 20.0,
                                    double T_hi_C = 200.0);

/// Longitudinal mismatch for a signal photon at a given internal angle, with
/// the partner placed by transverse momentum conservation on the far side.
struct NoncollinearMismatch {
  double delta_k_long = 0.0;  // 1/µm
  double partner_lambda_nm = 0.0;
  double partner_internal_rad = 0.0;  // magnitude
  double signal_k = 0.0;
  double partner_k = 0.0;
};

NoncollinearMismatch noncollinear_mismatch(double lambda_signal_nm, Polarization signal,
                                           double theta_signal_internal_rad, double T_C, Plane plane,
                                           const CrystalSpec& crystal, const PumpSpec& pump);

/// Internal angle (rad) whose refracted external angle is `theta_external_rad`.
double internal_from_external(Polarization pol, Plane plane, double lambda_nm, double T_C,
                              double theta_external_rad, const SellmeierSet& set);
double external_from_internal(Polarization pol, Plane plane, double lambda_nm, double T_C,
                              double theta_internal_rad, const SellmeierSet& set);

/// Largest internal angle covered by the near-collinear model.
inline constexpr double kMaxInternalAngle_deg = 3.0;

/// Non-collinear emission on a principal plane. The signal photon is emitted
/// at θ ≥ 0, the partner on the opposite side (θ ≤ 0).
/// Throws NoPhaseMatch when only collinear or no emission is possible and
/// ApproximationViolated when the solution needs more than 3° internally.
PhaseMatchPoint noncollinear_emission_angle(double lambda_signal_nm, double T_C, Plane plane,
                                            const CrystalSpec& crystal, const PumpSpec& pump,
                                            Polarization signal = Polarization::H);

struct MomentumResidual {
  double longitudinal = 0.0;  // Δk_x, 1/µm
  double transverse = 0.0;    // Δk_⊥, 1/µm
};

/// Direct substitution of a point into the QPM conditions.
MomentumResidual momentum_residual(const PhaseMatchPoint& point, const CrystalSpec& crystal,
                                   const PumpSpec& pump);

/// Temperature (below T_dc) at which degenerate pairs leave at the given
/// external angle on `plane`.
double degenerate_temperature_for_angle(double theta_external_deg, Plane plane, const CrystalSpec& crystal,
                                        const PumpSpec& pump, double T_lo_C = 20.0);

struct SlopeEstimate {
  double value = 0.0;
  double window_nm = 0.0;  // half-width actually used
  std::vector<std::string> warnings;
};

/// d(Δθ_HV)/d(Δλ_HV) around degeneracy in µrad/nm, from a symmetric
/// least-squares fit over ±window_nm of signal detuning. The window is halved
/// (with a warning) until every sample is solvable.
SlopeEstimate partner_angle_slope(double T_C, Plane plane, const CrystalSpec& crystal, const PumpSpec& pump,
                                  double window_nm = 5.0, int samples = 11);

/// dθ_H/dλ_H at the degenerate point in deg/nm (central difference). The step
/// shrinks near the collinear limit, where the slope diverges.
SlopeEstimate angle_wavelength_slope(double T_C, Plane plane, const CrystalSpec& crystal, const PumpSpec& pump,
                                     double step_nm = 0.05);

}  // namespace ppktp::phasematch
