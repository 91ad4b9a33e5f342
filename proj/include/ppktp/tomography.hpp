#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppktp/errors.hpp"
#include "ppktp/two_qubit.hpp"

namespace ppktp::tomography {

inline constexpr int kSettings = 16;

/// One analyzer setting: a product state |a⟩_A ⊗ |b⟩_B.
struct Projector {
  std::string label;  // e.g. "HD": H on mode A, D on mode B
  Vector4c state;
  Matrix4c matrix() const { return projector(state); }
};

/// The standard 16-setting product set built from H, V, D = (H+V)/√2,
/// R = (H−iV)/√2 and L = (H+iV)/√2, in the conventional acquisition order
/// HH HV VV VH RH RV DV DH DR DD RD HD VD VL HL RL.
const std::vector<Projector>& projector_set();

/// Index of `label` in projector_set(), or -1.
int projector_index(std::string_view label);

/// Counts for the 16 settings, stored in projector_set() order.
struct TomographyRecord {
  std::array<double, kSettings> counts{};
  double duration_s = 1.0;
  double power_mW = 1.0;
  std::map<std::string, std::string> metadata;  // extra `# key = value` lines

  void validate() const;
  double total() const;
};

enum class Noise { none, poisson };

/// Expected counts N·⟨ψ_i|ρ|ψ_i⟩, optionally Poisson sampled.
TomographyRecord simulate_counts(const TwoQubitDensityMatrix& rho, double counts_per_setting, Noise noise,
                                 std::uint64_t seed = 0);

/// Linear inversion in the Pauli operator basis, normalized to unit trace.
/// Hermitian by construction; not guaranteed positive semidefinite.
Matrix4c linear_reconstruct(const TomographyRecord& record);

enum class Likelihood { gaussian, poisson };

struct MleOptions {
  Likelihood likelihood = Likelihood::gaussian;
  int restarts = 5;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
  std::uint64_t seed = 0;
};

struct MleDiagnostics {
  bool converged = false;
  bool closed_form = false;  // linear inversion was already physical
  int iterations = 0;
  int starts = 0;
  double cost = 0.0;
  double gradient_norm = 0.0;
  std::string message;
};

struct MleResult {
  TwoQubitDensityMatrix rho;
  MleDiagnostics diagnostics;
};

/// Raised when no start converges; carries the best iterate.
class MleNotConverged : public NumericalFailure {
 public:
  MleNotConverged(const std::string& what, Matrix4c best, MleDiagnostics diagnostics)
      : NumericalFailure(what), best_(std::move(best)), diagnostics_(std::move(diagnostics)) {}
  const Matrix4c& best() const { return best_; }
  const MleDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  Matrix4c best_;
  MleDiagnostics diagnostics_;
};

/// Maximum-likelihood state over ρ = T†T / tr(T†T) with T lower triangular.
/// The 16 settings are informationally complete, so a physical linear
/// inversion reproduces the counts exactly and is returned directly;
/// otherwise a quasi-Newton search runs from the eigenvalue-clipped linear
/// estimate and from seeded random starts.
MleResult mle_reconstruct(const TomographyRecord& record, const MleOptions& options = {});

double concurrence(const TwoQubitDensityMatrix& rho);
double fidelity(const TwoQubitDensityMatrix& rho, const Vector4c& target);
double purity(const TwoQubitDensityMatrix& rho);

struct SweepPoint {
  double angle_deg = 0.0;
  double counts = 0.0;
};

/// Counts-weighted least-squares fit of a + b·sin(2θ + c) with b ≥ 0. Errors
/// scale the weighted covariance by the reduced χ².
struct VisibilityFit {
  double visibility = 0.0;  // b / a
  double amplitude = 0.0;   // b
  double offset = 0.0;      // a
  double phase_rad = 0.0;   // c
  double visibility_error = 0.0;
  double amplitude_error = 0.0;
  double offset_error = 0.0;
  double phase_error = 0.0;
  double residual_rms = 0.0;
};

/// Needs at least 6 points spanning at least 90° of analyzer angle.
VisibilityFit visibility_fit(const std::vector<SweepPoint>& sweep);

/// Reads the `label,count` record format. `#` lines carry metadata
/// (`# key = value`); duration_s and power_mW are recognised.
TomographyRecord parse_record(std::istream& in);
TomographyRecord load_record(const std::filesystem::path& file);
void write_record(std::ostream& out, const TomographyRecord& record);

/// {"basis": [...], "real": 4×4, "imag": 4×4}.
nlohmann::json density_to_json(const Matrix4c& rho);

}  // namespace ppktp::tomography
