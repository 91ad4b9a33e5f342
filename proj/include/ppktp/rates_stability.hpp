#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ppktp::rates_stability {

/// One coincidence measurement. Rates in Hz, window in s.
struct CoincidenceRecord {
  double singles_A_Hz = 0.0;
  double singles_B_Hz = 0.0;
  double raw_Hz = 0.0;
  double window_s = 55e-9;
  double power_mW = 1.0;
  double duration_s = 1.0;
  std::string combination;  // "HH", "VV", "HV", "VH"; empty counts as expected

  void validate() const;
};

/// S_A · S_B · τ_w.
double accidental_rate(double singles_A_Hz, double singles_B_Hz, double window_s);

/// max(0, raw − accidentals).
double net_coincidences(const CoincidenceRecord& record);

/// Per-arm efficiencies, each in (0, 1].
struct LossBudget {
  double polarizer = 1.0;
  double detector = 1.0;
  double coupling = 1.0;

  void validate() const;
  double efficiency() const { return polarizer * detector * coupling; }
};

struct BrightnessReport {
  std::map<std::string, double> per_combination_kHz_per_mW;
  double detected_kHz_per_mW = 0.0;  // expected combinations HH and VV
  double leakage_kHz_per_mW = 0.0;   // unexpected HV and VH
  double pair_rate_kHz_per_mW = 0.0;  // detected / (η_A η_B), a lower bound
};

/// Net rate per unit power for each combination (least-squares slope through
/// the origin when a combination has several powers), summed over the
/// expected combinations and corrected for both arms' losses.
BrightnessReport brightness(const std::vector<CoincidenceRecord>& records, const LossBudget& arm_A,
                            const LossBudget& arm_B);

/// Same, starting from per-combination rates already in kHz/mW.
BrightnessReport brightness(const std::map<std::string, double>& per_combination_kHz_per_mW,
                            const LossBudget& arm_A, const LossBudget& arm_B);

double spectral_rate(double rate, double bandwidth_nm);

/// rate · (L_to / L_from)^{3/2}.
double length_scaling(double rate, double length_from_mm, double length_to_mm);

struct PhaseFluctuation {
  double phase_rad = 0.0;
  double fraction_of_2pi = 0.0;
  double lambda_A_nm = 0.0;
  double lambda_B_nm = 0.0;
};

/// √m · |k_A − k_B| · Δl with λ_B − λ_A = δλ and 1/λ_A + 1/λ_B = 1/λ_p.
PhaseFluctuation phase_fluctuation(double delta_lambda_nm, double pump_nm, int m, double dl_um);

/// Rows `S_A,S_B,raw,window_ns,P_mW,duration_s` with an optional `combo`
/// column, columns matched by header name. `#` lines are comments.
std::vector<CoincidenceRecord> parse_coincidence_csv(std::istream& in);

nlohmann::json report_to_json(const BrightnessReport& report);

}  // namespace ppktp::rates_stability
