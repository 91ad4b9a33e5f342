#include "ppktp/emission_geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::emission_geometry {

using phasematch::Plane;

namespace {

double signal_angle(double T_C, double lambda_nm, Polarization pol, Plane plane, const CrystalSpec& crystal,
                    const PumpSpec& pump) {
  const auto p = phasematch::noncollinear_emission_angle(lambda_nm, T_C, plane, crystal, pump, pol);
  return std::abs(pol == Polarization::H ? p.theta_H_deg : p.theta_V_deg);
}

}  // namespace

RingCurve ring_curve(double T_C, double lambda_nm, Polarization pol, const CrystalSpec& crystal, const PumpSpec& pump,
                     int azimuth_samples) {
  if (azimuth_samples < 8) throw InputError("ring needs at least 8 azimuth samples");
  RingCurve ring;
  ring.T_C = T_C;
  ring.lambda_nm = lambda_nm;
  ring.pol = pol;
  ring.semi_axis_y_deg = signal_angle(T_C, lambda_nm, pol, Plane::xy, crystal, pump);
  ring.semi_axis_z_deg = signal_angle(T_C, lambda_nm, pol, Plane::xz, crystal, pump);
  ring.points.reserve(azimuth_samples);
  for (int i = 0; i < azimuth_samples; ++i) {
    const double phi = 2.0 * numerics::kPi * i / azimuth_samples;
    ring.points.push_back({ring.semi_axis_y_deg * std::cos(phi), ring.semi_axis_z_deg * std::sin(phi)});
  }
  return ring;
}

EllipseFit fit_ellipse(const std::vector<RingPoint>& points) {
  if (points.size() < 8) throw NumericalFailure("ellipse fit needs at least 8 points");
  double scale = 0.0;
  for (const auto& p : points) scale = std::max({scale, std::abs(p.y_deg), std::abs(p.z_deg)});
  if (scale < 1e-12) throw NumericalFailure("no ellipse: ring has zero radius");

  // Work in units of the largest coordinate to keep the system well scaled.
  Eigen::MatrixXd A(points.size(), 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double y = points[i].y_deg / scale;
    const double z = points[i].z_deg / scale;
    A.row(i) << y * y, y * z, z * z, y, z;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix2d M;
  M << c(0), 0.5 * c(1), 0.5 * c(1), c(2);
  const Eigen::Vector2d g(c(3), c(4));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(M);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw NumericalFailure("no ellipse: conic fit is not an ellipse");
  const Eigen::Vector2d center = -0.5 * M.ldlt().solve(g);
  const double level = 1.0 + center.dot(M * center);
  if (level <= 0.0) throw NumericalFailure("no ellipse: empty conic");

  EllipseFit fit;
  fit.center_y = center(0) * scale;
  fit.center_z = center(1) * scale;
  // Smallest eigenvalue belongs to the major axis.
  fit.semi_major = std::sqrt(level / eig.eigenvalues()(0)) * scale;
  fit.semi_minor = std::sqrt(level / eig.eigenvalues()(1)) * scale;
  const double ratio = fit.semi_minor / fit.semi_major;
  fit.eccentricity = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  return fit;
}

double ellipticity(const RingCurve& ring) { return fit_ellipse(ring.points).eccentricity; }

CrossSection cross_section_scan(double T_C, const FilterSpec& filter, Polarization pol, const CrystalSpec& crystal,
                                const PumpSpec& pump, double y_min_deg, double y_max_deg, double y_step_deg,
                                double lambda_step_nm) {
  filter.validate();
  if (!(y_step_deg > 0.0) || !(y_max_deg >= y_min_deg)) throw InputError("empty angle grid");
  // Gaussian tails beyond 2 FWHM carry < 1e-4 of the transmission.
  const double half_span = filter.shape == spectrum::FilterShape::top_hat ? 0.5 * filter.fwhm_nm : 2.0 * filter.fwhm_nm;
  const double l_lo = filter.center_nm - half_span;
  const int n_lambda = static_cast<int>(std::ceil(2.0 * half_span / lambda_step_nm));

  CrossSection scan;
  scan.T_C = T_C;
  scan.pol = pol;
  const int n_angle = static_cast<int>(std::floor((y_max_deg - y_min_deg) / y_step_deg + 1e-9));
  for (int i = 0; i <= n_angle; ++i) {
    const double y = y_min_deg + y_step_deg * i;
    double acc = 0.0;
    for (int j = 0; j <= n_lambda; ++j) {
      const double l = l_lo + lambda_step_nm * j;
      const double w = (j == 0 || j == n_lambda) ? 0.5 : 1.0;
      acc += w * filter.transmission(l) * spectrum::spectral_intensity(l, T_C, y, pol, crystal, pump);
    }
    scan.points.push_back({y, acc * lambda_step_nm});
  }
  return scan;
}

void normalize_profiles(std::vector<CrossSection>& scans) {
  double peak = 0.0;
  for (const auto& s : scans) {
    for (const auto& p : s.points) peak = std::max(peak, p.intensity);
  }
  if (peak <= 0.0) return;
  for (auto& s : scans) {
    for (auto& p : s.points) p.intensity /= peak;
  }
}

double peak_angle(const CrossSection& scan) {
  double best = 0.0;
  double best_v = -1.0;
  for (const auto& p : scan.points) {
    if (p.y_deg < 0.0) continue;
    if (p.intensity > best_v) {
      best_v = p.intensity;
      best = p.y_deg;
    }
  }
  return best;
}

}  // namespace ppktp::emission_geometry
