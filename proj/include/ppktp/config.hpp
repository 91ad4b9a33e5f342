#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ppktp/dispersion.hpp"
#include "ppktp/phasematch.hpp"

namespace ppktp::config {

/// Everything a CLI run depends on. Sections of the INI file mirror the
/// groups below; every key can also be set from the command line.
struct RunConfig {
  // [crystal]
  std::string coefficient_set{dispersion::kDefaultSetId};
  std::string coefficient_dir;  // extra *.ini sets, optional
  double period_um = 10.0;
  double length_mm = 10.0;
  double reference_temperature_C = 25.0;
  // [pump]
  double pump_nm = 406.2;
  double pump_bandwidth_GHz = 0.2;
  double pump_power_mW = 1.0;
  // [run]
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  // [geometry]
  std::string plane = "xy";
  double theta_mode_deg = 0.85;
  double temperature_C = 87.8;
  double lambda_nm = 812.4;
  // [sweep]
  double t_min_C = 42.0;
  double t_max_C = 122.0;
  double t_step_C = 1.0;
  double lambda_min_nm = 802.4;
  double lambda_max_nm = 822.4;
  double lambda_step_nm = 0.5;
  int azimuth_samples = 72;
  double y_min_deg = -3.0;
  double y_max_deg = 3.0;
  double y_step_deg = 0.02;
  // [filter]
  double filter_center_nm = 812.47;
  double filter_fwhm_nm = 3.0;
  std::string filter_shape = "gaussian";
  // [hom]
  double phi_rad = 0.0;
  double lp_a_deg = 45.0;
  double lp_b_deg = -45.0;
  double lambda_a_nm = 812.4;
  double lambda_b_nm = 812.4;
  double hom_bandwidth_nm = 0.553;
  double delay_min_fs = -6000.0;
  double delay_max_fs = 6000.0;
  double delay_step_fs = 10.0;
  std::string envelope = "gaussian";
  // [stability]
  double delta_lambda_nm = 50.0;
  int m = 5;
  double dl_um = 0.1;
  // [tomo]
  std::string tomo_input;
  std::string simulate = "bell";
  double counts_per_setting = 100000.0;
  std::string noise = "none";
  double werner_p = 0.9;
  std::string likelihood = "gaussian";
  int restarts = 5;
  // [rates]
  std::string rates_input;
  double rate_HH_kHz_per_mW = 2.0;
  double rate_VV_kHz_per_mW = 2.2;
  double rate_HV_kHz_per_mW = 0.036;
  double rate_VH_kHz_per_mW = 0.036;
  double polarizer_efficiency = 0.8;
  double detector_efficiency = 0.4;
  double coupling_efficiency = 1.0;
  double rates_bandwidth_nm = 0.553;
  double scaled_length_mm = 25.0;

  bool operator==(const RunConfig&) const = default;
};

using FieldRef = std::variant<double*, int*, std::uint64_t*, std::string*>;

struct Field {
  std::string_view section;
  std::string_view key;
  std::string_view flag;  // long option name without dashes
  std::string_view help;
  FieldRef ref;
};

/// Table of all configurable fields bound to `cfg`.
std::vector<Field> fields(RunConfig& cfg);

/// Sets one field from text. Throws InputError on a bad value.
void assign(const Field& field, std::string_view value);
std::string value_text(const Field& field);

/// INI text. Unknown sections or keys are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);
std::string serialize(const RunConfig& cfg);

/// FNV-1a of serialize(cfg), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Checks enumerations and numeric ranges; coefficient-set existence is
/// checked by crystal().
void validate(const RunConfig& cfg);

dispersion::CoefficientLibrary coefficient_library(const RunConfig& cfg);
dispersion::CrystalSpec crystal(const RunConfig& cfg);
phasematch::PumpSpec pump(const RunConfig& cfg);
phasematch::Plane plane(const RunConfig& cfg);

/// Config lines embedded in every output file, framed so they can be read back.
inline constexpr std::string_view kConfigBegin = "# --- config ---";
inline constexpr std::string_view kConfigEnd = "# --- end config ---";
std::string metadata_block(const RunConfig& cfg);
/// Recovers the config from an output file's metadata block.
RunConfig config_from_output(std::istream& in);

}  // namespace ppktp::config
