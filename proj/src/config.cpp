#include "ppktp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "ppktp/errors.hpp"

namespace ppktp::config {

namespace pt = boost::property_tree;

std::vector<Field> fields(RunConfig& c) {
  return {
      {"crystal", "coefficient_set", "set", "coefficient set id", &c.coefficient_set},
      {"crystal", "coefficient_dir", "coefficient-dir", "directory of extra coefficient files", &c.coefficient_dir},
      {"crystal", "period_um", "period", "poling period at the reference temperature (um)", &c.period_um},
      {"crystal", "length_mm", "length", "crystal length at the reference temperature (mm)", &c.length_mm},
      {"crystal", "reference_temperature_C", "reference-t", "temperature at which period and length are given (C)",
       &c.reference_temperature_C},
      {"pump", "lambda_nm", "lambda-p", "pump wavelength (nm)", &c.pump_nm},
      {"pump", "bandwidth_GHz", "pump-bandwidth", "pump linewidth (GHz)", &c.pump_bandwidth_GHz},
      {"pump", "power_mW", "pump-power", "pump power (mW)", &c.pump_power_mW},
      {"run", "output_dir", "out", "output directory", &c.output_dir},
      {"run", "seed", "seed", "random seed", &c.seed},
      {"geometry", "plane", "plane", "principal plane: xy or xz", &c.plane},
      {"geometry", "theta_mode_deg", "theta-mode", "external angle of the collection modes (deg)",
       &c.theta_mode_deg},
      {"geometry", "temperature_C", "t", "crystal temperature for single-T sweeps (C)", &c.temperature_C},
      {"geometry", "lambda_nm", "lambda", "photon wavelength for ring sweeps (nm)", &c.lambda_nm},
      {"sweep", "t_min_C", "t-min", "lowest temperature (C)", &c.t_min_C},
      {"sweep", "t_max_C", "t-max", "highest temperature (C)", &c.t_max_C},
      {"sweep", "t_step_C", "t-step", "temperature step (C)", &c.t_step_C},
      {"sweep", "lambda_min_nm", "lambda-min", "shortest signal wavelength (nm)", &c.lambda_min_nm},
      {"sweep", "lambda_max_nm", "lambda-max", "longest signal wavelength (nm)", &c.lambda_max_nm},
      {"sweep", "lambda_step_nm", "lambda-step", "wavelength step (nm)", &c.lambda_step_nm},
      {"sweep", "azimuth_samples", "azimuth-samples", "points per ring", &c.azimuth_samples},
      {"sweep", "y_min_deg", "y-min", "cross-section start angle (deg)", &c.y_min_deg},
      {"sweep", "y_max_deg", "y-max", "cross-section end angle (deg)", &c.y_max_deg},
      {"sweep", "y_step_deg", "y-step", "cross-section angle step (deg)", &c.y_step_deg},
      {"filter", "center_nm", "filter-center", "bandpass centre (nm)", &c.filter_center_nm},
      {"filter", "fwhm_nm", "filter-fwhm", "bandpass FWHM (nm)", &c.filter_fwhm_nm},
      {"filter", "shape", "filter-shape", "gaussian or top_hat", &c.filter_shape},
      {"hom", "phi_rad", "phi", "relative phase of the output state (rad)", &c.phi_rad},
      {"hom", "lp_a_deg", "lp-a", "analyzer angle in mode A (deg)", &c.lp_a_deg},
      {"hom", "lp_b_deg", "lp-b", "analyzer angle in mode B (deg)", &c.lp_b_deg},
      {"hom", "lambda_a_nm", "lambda-a", "photon wavelength in mode A (nm)", &c.lambda_a_nm},
      {"hom", "lambda_b_nm", "lambda-b", "photon wavelength in mode B (nm)", &c.lambda_b_nm},
      {"hom", "bandwidth_nm", "hom-bandwidth", "single-photon FWHM (nm)", &c.hom_bandwidth_nm},
      {"hom", "delay_min_fs", "delay-min", "first delay (fs)", &c.delay_min_fs},
      {"hom", "delay_max_fs", "delay-max", "last delay (fs)", &c.delay_max_fs},
      {"hom", "delay_step_fs", "delay-step", "delay step (fs)", &c.delay_step_fs},
      {"hom", "envelope", "envelope", "gaussian or sinc2", &c.envelope},
      {"stability", "delta_lambda_nm", "delta-lambda", "pair wavelength difference (nm)", &c.delta_lambda_nm},
      {"stability", "m", "m", "number of independent path fluctuations", &c.m},
      {"stability", "dl_um", "dl", "path fluctuation per element (um)", &c.dl_um},
      {"tomo", "input", "input", "tomography record file", &c.tomo_input},
      {"tomo", "simulate", "simulate", "state to simulate when no input: bell or werner", &c.simulate},
      {"tomo", "counts_per_setting", "n", "simulated counts per setting", &c.counts_per_setting},
      {"tomo", "noise", "noise", "none or poisson", &c.noise},
      {"tomo", "werner_p", "p", "Werner weight", &c.werner_p},
      {"tomo", "likelihood", "likelihood", "gaussian or poisson", &c.likelihood},
      {"tomo", "restarts", "restarts", "random restarts of the likelihood search", &c.restarts},
      {"rates", "input", "rates-input", "coincidence CSV file", &c.rates_input},
      {"rates", "HH_kHz_per_mW", "rate-hh", "net HH rate when no input (kHz/mW)", &c.rate_HH_kHz_per_mW},
      {"rates", "VV_kHz_per_mW", "rate-vv", "net VV rate when no input (kHz/mW)", &c.rate_VV_kHz_per_mW},
      {"rates", "HV_kHz_per_mW", "rate-hv", "net HV rate when no input (kHz/mW)", &c.rate_HV_kHz_per_mW},
      {"rates", "VH_kHz_per_mW", "rate-vh", "net VH rate when no input (kHz/mW)", &c.rate_VH_kHz_per_mW},
      {"rates", "polarizer_efficiency", "polarizer-eff", "analyzer transmittance per arm", &c.polarizer_efficiency},
      {"rates", "detector_efficiency", "detector-eff", "detector efficiency per arm", &c.detector_efficiency},
      {"rates", "coupling_efficiency", "coupling-eff", "fiber coupling efficiency per arm", &c.coupling_efficiency},
      {"rates", "bandwidth_nm", "rates-bandwidth", "photon bandwidth for the spectral rate (nm)",
       &c.rates_bandwidth_nm},
      {"rates", "scaled_length_mm", "scaled-length", "crystal length for the scaled rate (mm)", &c.scaled_length_mm},
  };
}

namespace {

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InputError(fmt::format("invalid value '{}' for {}", text, key));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw InputError(fmt::format("non-finite value for {}", key));
  }
  return v;
}

std::string full_key(const Field& f) { return fmt::format("{}.{}", f.section, f.key); }

void require(bool ok, std::string_view message) {
  if (!ok) throw InputError(std::string(message));
}

}  // namespace

void assign(const Field& field, std::string_view value) {
  const std::string key = full_key(field);
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (value.find('\n') != std::string_view::npos) throw InputError(fmt::format("newline in {}", key));
          *p = std::string(value);
        } else {
          *p = parse_value<T>(key, value);
        }
      },
      field.ref);
}

std::string value_text(const Field& field) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return *p;
        } else {
          return fmt::format("{}", *p);
        }
      },
      field.ref);
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(e.message(), static_cast<int>(e.line()));
  }
  RunConfig cfg;
  auto table = fields(cfg);
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) throw InputError(fmt::format("key '{}' outside any section", section));
    for (const auto& [key, node] : keys) {
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == table.end()) throw InputError(fmt::format("unknown config key '{}.{}'", section, key));
      assign(*it, node.data());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError(fmt::format("cannot open config '{}'", file.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  std::string_view section;
  for (const auto& f : fields(copy)) {
    if (f.section != section) {
      out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", f.section);
      section = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, value_text(f));
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

void validate(const RunConfig& c) {
  require(c.plane == "xy" || c.plane == "xz", "geometry.plane must be xy or xz");
  require(c.filter_shape == "gaussian" || c.filter_shape == "top_hat", "filter.shape must be gaussian or top_hat");
  require(c.envelope == "gaussian" || c.envelope == "sinc2", "hom.envelope must be gaussian or sinc2");
  require(c.simulate == "bell" || c.simulate == "werner", "tomo.simulate must be bell or werner");
  require(c.noise == "none" || c.noise == "poisson", "tomo.noise must be none or poisson");
  require(c.likelihood == "gaussian" || c.likelihood == "poisson", "tomo.likelihood must be gaussian or poisson");
  require(c.period_um > 0 && c.length_mm > 0, "crystal period and length must be positive");
  require(c.pump_nm > 0 && c.pump_power_mW > 0, "pump wavelength and power must be positive");
  require(c.t_step_C > 0 && c.t_max_C >= c.t_min_C, "sweep temperature range is invalid");
  require(c.lambda_step_nm > 0 && c.lambda_max_nm >= c.lambda_min_nm, "sweep wavelength range is invalid");
  require(c.y_step_deg > 0 && c.y_max_deg >= c.y_min_deg, "sweep angle range is invalid");
  require(c.delay_step_fs > 0 && c.delay_max_fs >= c.delay_min_fs, "hom delay range is invalid");
  require(c.azimuth_samples >= 8, "sweep.azimuth_samples must be at least 8");
  require(c.restarts >= 0, "tomo.restarts must be non-negative");
  require(c.werner_p >= 0 && c.werner_p <= 1, "tomo.werner_p must lie in [0, 1]");
  require(c.counts_per_setting > 0, "tomo.counts_per_setting must be positive");
  require(c.m >= 1 && c.dl_um >= 0 && c.delta_lambda_nm >= 0, "stability parameters out of range");
  require(!c.output_dir.empty(), "run.output_dir must not be empty");
}

dispersion::CoefficientLibrary coefficient_library(const RunConfig& cfg) {
  auto lib = dispersion::CoefficientLibrary::builtin();
  if (!cfg.coefficient_dir.empty()) lib.load_directory(cfg.coefficient_dir);
  return lib;
}

dispersion::CrystalSpec crystal(const RunConfig& cfg) {
  dispersion::CrystalSpec c;
  c.period_um = cfg.period_um;
  c.length_mm = cfg.length_mm;
  c.reference_temperature_C = cfg.reference_temperature_C;
  c.sellmeier = coefficient_library(cfg).get(cfg.coefficient_set);
  c.validate();
  return c;
}

phasematch::PumpSpec pump(const RunConfig& cfg) {
  phasematch::PumpSpec p;
  p.wavelength_nm = cfg.pump_nm;
  p.bandwidth_GHz = cfg.pump_bandwidth_GHz;
  p.power_mW = cfg.pump_power_mW;
  p.validate();
  return p;
}

phasematch::Plane plane(const RunConfig& cfg) {
  if (cfg.plane == "xy") return phasematch::Plane::xy;
  if (cfg.plane == "xz") return phasematch::Plane::xz;
  throw InputError("geometry.plane must be xy or xz");
}

std::string metadata_block(const RunConfig& cfg) {
  std::string out = std::string(kConfigBegin) + "\n";
  std::istringstream lines(serialize(cfg));
  for (std::string line; std::getline(lines, line);) out += line.empty() ? "#\n" : "# " + line + "\n";
  return out + std::string(kConfigEnd) + "\n";
}

RunConfig config_from_output(std::istream& in) {
  std::string line, text;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line == kConfigBegin) {
      inside = true;
    } else if (line == kConfigEnd) {
      return parse_config(text);
    } else if (inside) {
      if (line.rfind('#', 0) != 0) break;
      text += line.size() > 2 ? line.substr(2) : "";
      text += "\n";
    }
  }
  throw InputError("no config block found");
}

}  // namespace ppktp::config
