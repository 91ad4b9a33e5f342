#pragma once

#include <vector>

#include "ppktp/dispersion.hpp"
#include "ppktp/two_qubit.hpp"

namespace ppktp::polarization_optics {

using JonesMatrix = Matrix2c;

enum class WaveplateKind { HWP, QWP };

/// Linear retarder with fast axis at `angle_deg` from H.
JonesMatrix retarder(double retardance_rad, double angle_deg);
JonesMatrix waveplate(WaveplateKind kind, double angle_deg);
/// Rank-1 projector onto linear polarization at `angle_deg`.
JonesMatrix linear_polarizer(double angle_deg);

/// QWP(45°)·HWP(θ)·QWP(45°). Diagonal in {H, V} for every θ.
JonesMatrix phase_shifter_matrix(double hwp_angle_deg);
/// Relative V-vs-H phase of the phase shifter, wrapped to (−π, π].
/// The composition gives φ = 4θ − π.
double phase_shifter(double hwp_angle_deg);
/// HWP angle in [0°, 90°) that produces phase φ.
double hwp_angle_for_phase(double phase_rad);

/// Polarization state after the compensator, with the wavelength and timing
/// labels that control two-photon interference.
struct TwoPhotonState {
  Vector4c amplitudes;
  double lambda_A_nm = 812.4;
  double lambda_B_nm = 812.4;
  double bandwidth_nm = 0.553;
  double delay_fs = 0.0;
};

TwoPhotonState output_state(double phase_rad, double lambda_A_nm, double lambda_B_nm, double bandwidth_nm,
                            double delay_fs);

/// Free-space path the delay line must add to cancel the H/V group delay
/// over the crystal: (n_g,y − n_g,z)·L, in µm (sign follows the mode-b path).
double compensator_delay(double T_C, const dispersion::CrystalSpec& crystal, double lambda_nm = 812.4);

/// Relative delay (fs) for a delay-line position, given the compensation offset.
double odl_delay_fs(double odl_position_um, double compensation_offset_um);

enum class EnvelopeShape { gaussian, sinc2 };

struct HomParams {
  double phase_rad = 0.0;
  double lambda_A_nm = 812.4;
  double lambda_B_nm = 812.4;
  double bandwidth_nm = 0.553;
  EnvelopeShape envelope = EnvelopeShape::gaussian;
};

/// δω = 2πc(1/λ_A − 1/λ_B) in rad/fs.
double beat_angular_frequency(double lambda_A_nm, double lambda_B_nm);

/// Spectral-overlap visibility envelope at delay τ. Gaussian spectra give a
/// gaussian; sinc² spectra give a triangle.
double envelope(double delay_fs, const HomParams& params);

/// Two-photon density matrix whose HH–VV coherence carries the envelope and
/// the beat phase at delay τ.
Matrix4c effective_density(const HomParams& params, double delay_fs);

/// Coincidence probability behind linear analyzers at the given angles.
double coincidence_probability(const Matrix4c& rho, double lp_A_deg, double lp_B_deg);

struct TracePoint {
  double x = 0.0;  // delay (fs) or analyzer angle (deg)
  double probability = 0.0;
};

/// P(τ) = P_dist + P_int · V(τ) · cos(φ + δω τ) for τ on [τ_min, τ_max].
std::vector<TracePoint> hom_scan(const HomParams& params, double lp_A_deg, double lp_B_deg, double delay_min_fs,
                                 double delay_max_fs, double delay_step_fs);

/// Coincidence vs LP_B with LP_A fixed.
std::vector<TracePoint> correlation_scan(const Matrix4c& rho, double lp_A_deg, double lp_B_min_deg = 0.0,
                                         double lp_B_max_deg = 180.0, double lp_B_step_deg = 5.0);
std::vector<TracePoint> correlation_scan(const HomParams& params, double delay_fs, double lp_A_deg,
                                         double lp_B_min_deg = 0.0, double lp_B_max_deg = 180.0,
                                         double lp_B_step_deg = 5.0);

/// (max − min)/(max + min) over a trace.
double trace_visibility(const std::vector<TracePoint>& trace);

}  // namespace ppktp::polarization_optics
