#pragma once

#include <array>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace ppktp {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

/// Basis order of every two-qubit object: |HH⟩, |HV⟩, |VH⟩, |VV⟩ (mode A first).
inline constexpr std::array<std::string_view, 4> kTwoQubitBasis{"HH", "HV", "VH", "VV"};

/// (|HH⟩ + e^{iφ}|VV⟩)/√2.
Vector4c phi_state(double phase_rad);
inline Vector4c phi_plus() { return phi_state(0.0); }

Matrix4c projector(const Vector4c& psi);

/// p |Φ+⟩⟨Φ+| + (1 − p) I/4.
Matrix4c werner_state(double p);

/// Density matrix with checked invariants: Hermitian, unit trace and PSD to
/// the given tolerance (eigenvalues down to −tol count as zero).
class TwoQubitDensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Throws InputError naming the violated invariant.
  explicit TwoQubitDensityMatrix(const Matrix4c& rho, double tol = kTolerance);

  const Matrix4c& matrix() const { return rho_; }
  Complex operator()(int r, int c) const { return rho_(r, c); }

  /// Reports whether `rho` satisfies the invariants, without throwing.
  static bool is_valid(const Matrix4c& rho, double tol = kTolerance);

 private:
  Matrix4c rho_;
};

}  // namespace ppktp
