#include "ppktp/rates_stability.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::rates_stability {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(fmt::format("{} must be non-negative, got {}", what, v));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(fmt::format("{} must be positive, got {}", what, v));
}

bool is_expected(const std::string& combo) { return combo.empty() || combo == "HH" || combo == "VV"; }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

}  // namespace

void CoincidenceRecord::validate() const {
  require_nonnegative(singles_A_Hz, "S_A");
  require_nonnegative(singles_B_Hz, "S_B");
  require_nonnegative(raw_Hz, "raw");
  require_positive(window_s, "window");
  require_positive(power_mW, "P_mW");
  require_positive(duration_s, "duration_s");
}

double accidental_rate(double singles_A_Hz, double singles_B_Hz, double window_s) {
  require_nonnegative(singles_A_Hz, "S_A");
  require_nonnegative(singles_B_Hz, "S_B");
  require_nonnegative(window_s, "window");
  return singles_A_Hz * singles_B_Hz * window_s;
}

double net_coincidences(const CoincidenceRecord& record) {
  record.validate();
  return std::max(0.0, record.raw_Hz - accidental_rate(record.singles_A_Hz, record.singles_B_Hz, record.window_s));
}

void LossBudget::validate() const {
  for (auto [v, name] : {std::pair{polarizer, "polarizer"}, {detector, "detector"}, {coupling, "coupling"}})
    if (!(v > 0.0 && v <= 1.0)) throw InputError(fmt::format("{} efficiency {} outside (0, 1]", name, v));
}

BrightnessReport brightness(const std::map<std::string, double>& per_combination_kHz_per_mW,
                            const LossBudget& arm_A, const LossBudget& arm_B) {
  arm_A.validate();
  arm_B.validate();
  BrightnessReport r;
  r.per_combination_kHz_per_mW = per_combination_kHz_per_mW;
  for (const auto& [combo, rate] : per_combination_kHz_per_mW) {
    require_nonnegative(rate, "combination rate");
    (is_expected(combo) ? r.detected_kHz_per_mW : r.leakage_kHz_per_mW) += rate;
  }
  r.pair_rate_kHz_per_mW = r.detected_kHz_per_mW / (arm_A.efficiency() * arm_B.efficiency());
  return r;
}

BrightnessReport brightness(const std::vector<CoincidenceRecord>& records, const LossBudget& arm_A,
                            const LossBudget& arm_B) {
  if (records.empty()) throw InputError("no coincidence records");
  std::map<std::string, std::pair<double, double>> sums;  // Σ net·P, Σ P²
  for (const auto& rec : records) {
    const double net = net_coincidences(rec);
    auto& [np, pp] = sums[rec.combination];
    np += net * rec.power_mW;
    pp += rec.power_mW * rec.power_mW;
  }
  std::map<std::string, double> rates;
  for (const auto& [combo, s] : sums) rates[combo] = s.first / s.second * 1e-3;
  return brightness(rates, arm_A, arm_B);
}

double spectral_rate(double rate, double bandwidth_nm) {
  require_positive(bandwidth_nm, "bandwidth");
  return rate / bandwidth_nm;
}

double length_scaling(double rate, double length_from_mm, double length_to_mm) {
  require_positive(length_from_mm, "source length");
  require_positive(length_to_mm, "target length");
  return rate * std::pow(length_to_mm / length_from_mm, 1.5);
}

PhaseFluctuation phase_fluctuation(double delta_lambda_nm, double pump_nm, int m, double dl_um) {
  require_nonnegative(delta_lambda_nm, "delta lambda");
  require_positive(pump_nm, "pump wavelength");
  require_nonnegative(dl_um, "path fluctuation");
  if (m < 1) throw InputError(fmt::format("m must be at least 1, got {}", m));
  PhaseFluctuation out;
  // λ_A² + (δλ − 2λ_p) λ_A − λ_p δλ = 0, positive root.
  const double b = delta_lambda_nm - 2.0 * pump_nm;
  const double c = -pump_nm * delta_lambda_nm;
  out.lambda_A_nm = 0.5 * (-b + std::sqrt(b * b - 4.0 * c));
  out.lambda_B_nm = out.lambda_A_nm + delta_lambda_nm;
  if (delta_lambda_nm == 0.0) return out;
  const double dk = 2.0 * numerics::kPi * std::abs(1.0 / out.lambda_A_nm - 1.0 / out.lambda_B_nm) * 1e3;  // 1/µm
  out.phase_rad = std::sqrt(static_cast<double>(m)) * dk * dl_um;
  out.fraction_of_2pi = out.phase_rad / (2.0 * numerics::kPi);
  return out;
}

std::vector<CoincidenceRecord> parse_coincidence_csv(std::istream& in) {
  static const std::array<std::string, 6> required{"S_A", "S_B", "raw", "window_ns", "P_mW", "duration_s"};
  std::vector<CoincidenceRecord> out;
  std::vector<int> column(required.size(), -1);
  int combo_column = -1;
  std::size_t width = 0;
  bool have_header = false;
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    const auto fields = split(text);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto it = std::find(required.begin(), required.end(), fields[i]);
        if (it != required.end()) column[it - required.begin()] = static_cast<int>(i);
        if (fields[i] == "combo") combo_column = static_cast<int>(i);
      }
      for (std::size_t k = 0; k < required.size(); ++k)
        if (column[k] < 0) throw InputError(fmt::format("missing column '{}'", required[k]), line);
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width)
      throw InputError(fmt::format("expected {} fields, found {}", width, fields.size()), line);
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < required.size(); ++k) {
      const std::string& f = fields[column[k]];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw InputError(fmt::format("invalid {} value '{}'", required[k], f), line);
    }
    CoincidenceRecord rec{v[0], v[1], v[2], v[3] * 1e-9, v[4], v[5], combo_column >= 0 ? fields[combo_column] : ""};
    try {
      rec.validate();
    } catch (const InputError& e) {
      throw InputError(e.what(), line);
    }
    out.push_back(rec);
  }
  if (!have_header) throw InputError("coincidence file has no header");
  if (out.empty()) throw InputError("coincidence file has no records");
  return out;
}

nlohmann::json report_to_json(const BrightnessReport& report) {
  return {{"per_combination_kHz_per_mW", report.per_combination_kHz_per_mW},
          {"detected_kHz_per_mW", report.detected_kHz_per_mW},
          {"leakage_kHz_per_mW", report.leakage_kHz_per_mW},
          {"pair_rate_kHz_per_mW", report.pair_rate_kHz_per_mW}};
}

}  // namespace ppktp::rates_stability
