#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ppktp::dispersion {

enum class Axis { x, y, z };

std::string_view to_string(Axis axis);

/// Functional form of the room-temperature Sellmeier expression (λ in µm):
///   pole:        n² = A + Σ Bᵢ / (λ² − Cᵢ) − D λ²
///   oscillator:  n² = A + Σ Bᵢ / (1 − Cᵢ / λ²) − D λ²
enum class SellmeierForm { pole, oscillator };

/// Dispersion and thermo-optic coefficients of one principal axis.
///
/// The temperature correction is added to the Sellmeier index:
///   Δn = n₁(λ)(T − T₀) + n₂(λ)(T − T₀)²,  n_k(λ) = Σ_m a_km / λ^m  (m = 0..3)
struct AxisCoefficients {
  SellmeierForm form = SellmeierForm::pole;
  double constant = 1.0;
  std::vector<double> strengths;       // Bᵢ
  std::vector<double> resonances_um2;  // Cᵢ
  double ir_correction = 0.0;          // D
  double thermo_reference_C = 25.0;    // T₀
  std::array<double, 4> thermo_linear{};
  std::array<double, 4> thermo_quadratic{};
};

struct SellmeierSet {
  std::string id;
  std::string description;
  double lambda_min_um = 0.0;
  double lambda_max_um = 0.0;
  std::array<AxisCoefficients, 3> axes;  // x, y, z
  // Length scale 1 + α(T − T_ref) + β(T − T_ref)².
  double expansion_alpha = 0.0;
  double expansion_beta = 0.0;
  double expansion_reference_C = 25.0;

  const AxisCoefficients& axis(Axis a) const { return axes[static_cast<int>(a)]; }
  AxisCoefficients& axis(Axis a) { return axes[static_cast<int>(a)]; }
};

/// Parses the INI coefficient format (see data/coefficients/*.ini).
SellmeierSet parse_sellmeier_set(std::string_view text);
SellmeierSet load_sellmeier_set(const std::filesystem::path& file);

/// Named coefficient sets: the compiled-in files plus any loaded at runtime.
class CoefficientLibrary {
 public:
  /// Library holding the built-in sets.
  static CoefficientLibrary builtin();

  void add(SellmeierSet set);
  /// Adds every `*.ini` file in `dir`; later files replace same-id sets.
  void load_directory(const std::filesystem::path& dir);
  bool contains(std::string_view id) const;
  /// Throws InputError listing the available ids when `id` is unknown.
  const SellmeierSet& get(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, SellmeierSet, std::less<>> sets_;
};

/// Identifier of the default set.
inline constexpr std::string_view kDefaultSetId = "fiorentino2007";

/// Builtin set by id (throws InputError when absent).
const SellmeierSet& builtin_set(std::string_view id = kDefaultSetId);

/// n(λ, T) for one principal axis. Throws DomainError outside the set's
/// validity range.
double refractive_index(Axis axis, double lambda_um, double T_C, const SellmeierSet& set);

/// Central finite-difference step used by group_index, in µm.
inline constexpr double kGroupIndexStep_um = 1e-4;

/// n_g = n − λ dn/dλ. λ must lie at least one finite-difference step inside
/// the validity range.
double group_index(Axis axis, double lambda_um, double T_C, const SellmeierSet& set,
                   double step_um = kGroupIndexStep_um);

/// Multiplicative length factor 1 + α(T − T_ref) + β(T − T_ref)².
double thermal_scale(double T_C, const SellmeierSet& set);

/// Poled crystal. Period and length are specified at `reference_temperature_C`.
struct CrystalSpec {
  double period_um = 10.0;
  double length_mm = 10.0;
  double reference_temperature_C = 25.0;
  SellmeierSet sellmeier;

  /// Throws InputError for non-positive period or length.
  void validate() const;
  /// Grating wavenumber 2π/Λ(T) in 1/µm.
  double grating_wavenumber(double T_C) const;
  /// Crystal length L(T) in µm.
  double length_um(double T_C) const;
};

/// Reference crystal: Λ = 10 µm, L = 10 mm, default coefficient set.
CrystalSpec default_crystal(std::string_view set_id = kDefaultSetId);

}  // namespace ppktp::dispersion
