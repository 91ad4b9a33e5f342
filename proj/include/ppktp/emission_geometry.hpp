#pragma once

#include <vector>

#include "ppktp/spectrum.hpp"

namespace ppktp::emission_geometry {

using dispersion::CrystalSpec;
using phasematch::Polarization;
using phasematch::PumpSpec;
using spectrum::FilterSpec;

struct RingPoint {
  double y_deg = 0.0;
  double z_deg = 0.0;
};

/// Emission ring of one polarization on the transverse (yz) plane.
struct RingCurve {
  std::vector<RingPoint> points;  // one per azimuth, curve is closed
  double T_C = 0.0;
  double lambda_nm = 0.0;
  Polarization pol = Polarization::H;
  double semi_axis_y_deg = 0.0;  // from the xy-plane solution
  double semi_axis_z_deg = 0.0;  // from the xz-plane solution
};

/// Ellipse through the four principal-plane solutions of the `pol` photon at
/// wavelength λ. Throws NoPhaseMatch if either plane has no emission.
RingCurve ring_curve(double T_C, double lambda_nm, Polarization pol, const CrystalSpec& crystal,
                     const PumpSpec& pump, int azimuth_samples = 72);

struct EllipseFit {
  double center_y = 0.0;
  double center_z = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double eccentricity = 0.0;  // sqrt(1 - (b/a)^2)
};

/// Least-squares conic fit A y² + B yz + C z² + D y + E z = 1.
/// Needs at least 8 points; throws NumericalFailure("no ellipse") for a
/// degenerate ring.
EllipseFit fit_ellipse(const std::vector<RingPoint>& points);

/// Ellipticity e = sqrt(1 − (b/a)²) of the fitted ring.
double ellipticity(const RingCurve& ring);

struct ProfilePoint {
  double y_deg = 0.0;
  double intensity = 0.0;
};

struct CrossSection {
  std::vector<ProfilePoint> points;
  double T_C = 0.0;
  Polarization pol = Polarization::H;
};

/// Counts along the y axis behind a bandpass filter: at each angle the
/// spectral intensity is integrated over the filter transmission (raw units
/// of nm). Emission is centro-symmetric, so ±y share a value.
CrossSection cross_section_scan(double T_C, const FilterSpec& filter, Polarization pol, const CrystalSpec& crystal,
                                const PumpSpec& pump, double y_min_deg, double y_max_deg, double y_step_deg,
                                double lambda_step_nm = 0.01);

/// Normalises a set of scans to a common unit peak.
void normalize_profiles(std::vector<CrossSection>& scans);

/// Angle of the largest value in a profile, taken on the y >= 0 side.
double peak_angle(const CrossSection& scan);

}  // namespace ppktp::emission_geometry
