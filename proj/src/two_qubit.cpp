#include "ppktp/two_qubit.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ppktp/errors.hpp"

namespace ppktp {

Vector4c phi_state(double phase_rad) {
  Vector4c psi = Vector4c::Zero();
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = std::polar(1.0 / std::sqrt(2.0), phase_rad);
  return psi;
}

Matrix4c projector(const Vector4c& psi) { return psi * psi.adjoint(); }

Matrix4c werner_state(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(fmt::format("Werner weight {} outside [0, 1]", p));
  return p * projector(phi_plus()) + (1.0 - p) * Matrix4c::Identity() / 4.0;
}

namespace {

// Empty string when valid, otherwise a description of the first violation.
std::string check(const Matrix4c& rho, double tol) {
  if (!rho.allFinite()) return "density matrix has non-finite entries";
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) return fmt::format("density matrix not Hermitian (deviation {:.3g})", herm);
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > tol) return fmt::format("density matrix trace {:.12g} != 1", tr.real());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol) return fmt::format("density matrix not positive semidefinite (eigenvalue {:.3g})", min_eig);
  return {};
}

}  // namespace

TwoQubitDensityMatrix::TwoQubitDensityMatrix(const Matrix4c& rho, double tol) : rho_(rho) {
  if (auto msg = check(rho, tol); !msg.empty()) throw InputError(msg);
}

bool TwoQubitDensityMatrix::is_valid(const Matrix4c& rho, double tol) { return check(rho, tol).empty(); }

}  // namespace ppktp
