#pragma once

#include <utility>
#include <vector>

#include "ppktp/phasematch.hpp"

namespace ppktp::spectrum {

using dispersion::CrystalSpec;
using phasematch::Plane;
using phasematch::Polarization;
using phasematch::PumpSpec;

struct SpectralSample {
  double lambda_nm = 0.0;
  double intensity = 0.0;
};

/// Spectrum of one polarization collected at a fixed external mode angle,
/// normalised to unit peak.
struct SpectralCurve {
  std::vector<SpectralSample> samples;
  Polarization pol = Polarization::H;
  double T_C = 0.0;
  double theta_mode_deg = 0.0;
};

enum class FilterShape { gaussian, top_hat };

/// Bandpass filter; also used for the tunable spectrometer filter.
struct FilterSpec {
  double center_nm = 812.0;
  double fwhm_nm = 3.0;
  FilterShape shape = FilterShape::gaussian;

  void validate() const;
  /// Transmission at λ, 1 at the centre.
  double transmission(double lambda_nm) const;
};

/// Longitudinal QPM residual (1/µm) for a photon of `pol` at λ leaving at the
/// external angle θ_mode, partner placed by transverse momentum conservation.
double longitudinal_mismatch(double lambda_nm, double T_C, double theta_mode_deg, Polarization pol,
                             const CrystalSpec& crystal, const PumpSpec& pump, Plane plane = Plane::xy);

/// sinc²(Δk_long · L(T) / 2).
double spectral_intensity(double lambda_nm, double T_C, double theta_mode_deg, Polarization pol,
                          const CrystalSpec& crystal, const PumpSpec& pump, Plane plane = Plane::xy);

/// Uniformly sampled, unit-peak spectrum.
SpectralCurve sample_spectrum(double T_C, double theta_mode_deg, Polarization pol, double lambda_min_nm,
                              double lambda_max_nm, double step_nm, const CrystalSpec& crystal,
                              const PumpSpec& pump);

/// Pair wavelengths for the mode at θ_mode: λ_H is the spectral peak of the H
/// photon collected in the mode, λ_V its energy-conjugate partner.
/// Throws NoPhaseMatch ("mode dark") when no intensity above 1e-6 is found.
std::pair<double, double> center_wavelengths(double T_C, double theta_mode_deg, const CrystalSpec& crystal,
                                             const PumpSpec& pump);

/// Peak wavelength of the `pol` photon collected in the mode.
double peak_wavelength(double T_C, double theta_mode_deg, Polarization pol, const CrystalSpec& crystal,
                       const PumpSpec& pump);

/// FWHM (nm) of the `pol` spectrum by bisection on the half-maximum crossings.
double bandwidth(double T_C, double theta_mode_deg, Polarization pol, const CrystalSpec& crystal,
                 const PumpSpec& pump);

struct TuningPoint {
  double T_C = 0.0;
  double lambda_H_nm = 0.0;
  double lambda_V_nm = 0.0;
};

struct TuningResult {
  std::vector<TuningPoint> points;
  double slope_H = 0.0;  // nm/°C
  double slope_V = 0.0;
  double residual_rms_H = 0.0;  // nm
  double residual_rms_V = 0.0;
};

/// Linear least-squares tuning slopes over temperatures T_min..T_max in steps
/// of T_step. Unsolvable temperatures are skipped; fewer than 5 solvable
/// points is an error.
TuningResult tuning_slope(double T_min_C, double T_max_C, double T_step_C, double theta_mode_deg,
                          const CrystalSpec& crystal, const PumpSpec& pump);

struct BandwidthPoint {
  double T_C = 0.0;
  double fwhm_H_nm = 0.0;
  double fwhm_V_nm = 0.0;
};

std::vector<BandwidthPoint> bandwidth_vs_T(double T_min_C, double T_max_C, double T_step_C, double theta_mode_deg,
                                           const CrystalSpec& crystal, const PumpSpec& pump);

/// Temperature where the λ_H and λ_V branches cross (λ_H = 2λp).
double branch_crossing_temperature(double theta_mode_deg, const CrystalSpec& crystal, const PumpSpec& pump,
                                   double T_lo_C = 20.0, double T_hi_C = 200.0);

/// Discrete convolution with the filter transmission on the curve's own
/// uniform grid, renormalised to unit peak. Samples beyond the grid count as 0.
SpectralCurve convolve_with_filter(const SpectralCurve& curve, const FilterSpec& filter);

/// FWHM of a sampled curve by linear interpolation of the half-maximum crossings.
double curve_fwhm(const SpectralCurve& curve);

}  // namespace ppktp::spectrum
