#include "ppktp/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "builtin_coefficients.hpp"
#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"

namespace ppktp::dispersion {

namespace pt = boost::property_tree;

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw InputError(fmt::format("coefficient '{}': '{}' is not a number", key, token));
    }
  }
  return out;
}

double get_number(const pt::ptree& tree, const std::string& key) {
  auto value = tree.get_optional<std::string>(key);
  if (!value) throw InputError(fmt::format("missing coefficient key '{}'", key));
  auto list = parse_list(*value, key);
  if (list.size() != 1) throw InputError(fmt::format("key '{}' must hold one number", key));
  return list.front();
}

std::array<double, 4> get_poly(const pt::ptree& tree, const std::string& key) {
  auto value = tree.get_optional<std::string>(key);
  if (!value) throw InputError(fmt::format("missing coefficient key '{}'", key));
  auto list = parse_list(*value, key);
  if (list.size() != 4) throw InputError(fmt::format("key '{}' must hold four numbers", key));
  return {list[0], list[1], list[2], list[3]};
}

AxisCoefficients parse_axis(const pt::ptree& tree, const std::string& section) {
  AxisCoefficients c;
  const std::string form = tree.get<std::string>(section + ".form", "");
  if (form == "pole") {
    c.form = SellmeierForm::pole;
  } else if (form == "oscillator") {
    c.form = SellmeierForm::oscillator;
  } else {
    throw InputError(fmt::format("[{}] form must be 'pole' or 'oscillator', got '{}'", section, form));
  }
  c.constant = get_number(tree, section + ".A");
  c.strengths = parse_list(tree.get<std::string>(section + ".B", ""), section + ".B");
  c.resonances_um2 = parse_list(tree.get<std::string>(section + ".C", ""), section + ".C");
  if (c.strengths.size() != c.resonances_um2.size()) {
    throw InputError(fmt::format("[{}] B and C must have the same number of terms", section));
  }
  c.ir_correction = get_number(tree, section + ".D");
  c.thermo_reference_C = get_number(tree, section + ".thermo_reference_C");
  c.thermo_linear = get_poly(tree, section + ".thermo_linear");
  c.thermo_quadratic = get_poly(tree, section + ".thermo_quadratic");
  return c;
}

double sellmeier_index(const AxisCoefficients& c, double lambda_um) {
  const double l2 = lambda_um * lambda_um;
  double n2 = c.constant - c.ir_correction * l2;
  for (std::size_t i = 0; i < c.strengths.size(); ++i) {
    if (c.form == SellmeierForm::pole) {
      n2 += c.strengths[i] / (l2 - c.resonances_um2[i]);
    } else {
      n2 += c.strengths[i] / (1.0 - c.resonances_um2[i] / l2);
    }
  }
  return std::sqrt(n2);
}

double inverse_power_poly(const std::array<double, 4>& a, double lambda_um) {
  const double r = 1.0 / lambda_um;
  return a[0] + r * (a[1] + r * (a[2] + r * a[3]));
}

}  // namespace

SellmeierSet parse_sellmeier_set(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(e.message(), static_cast<int>(e.line()));
  }
  SellmeierSet s;
  s.id = tree.get<std::string>("source.id", "");
  if (s.id.empty()) throw InputError("coefficient file lacks [source] id");
  s.description = tree.get<std::string>("source.description", "");
  s.lambda_min_um = get_number(tree, "source.lambda_min_um");
  s.lambda_max_um = get_number(tree, "source.lambda_max_um");
  if (!(s.lambda_min_um > 0.0 && s.lambda_max_um > s.lambda_min_um)) {
    throw InputError(fmt::format("set '{}' has an empty validity range", s.id));
  }
  s.expansion_reference_C = get_number(tree, "expansion.reference_C");
  s.expansion_alpha = get_number(tree, "expansion.alpha");
  s.expansion_beta = get_number(tree, "expansion.beta");
  s.axis(Axis::x) = parse_axis(tree, "x");
  s.axis(Axis::y) = parse_axis(tree, "y");
  s.axis(Axis::z) = parse_axis(tree, "z");
  return s;
}

SellmeierSet load_sellmeier_set(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open coefficient file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_sellmeier_set(buf.str());
  } catch (const InputError& e) {
    throw InputError(file.filename().string() + ": " + e.what());
  }
}

CoefficientLibrary CoefficientLibrary::builtin() {
  CoefficientLibrary lib;
  for (const auto& [name, text] : detail::kBuiltinCoefficientFiles) lib.add(parse_sellmeier_set(text));
  return lib;
}

void CoefficientLibrary::add(SellmeierSet set) {
  std::string id = set.id;
  sets_.insert_or_assign(std::move(id), std::move(set));
}

void CoefficientLibrary::load_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ini") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) add(load_sellmeier_set(f));
}

bool CoefficientLibrary::contains(std::string_view id) const { return sets_.find(id) != sets_.end(); }

const SellmeierSet& CoefficientLibrary::get(std::string_view id) const {
  auto it = sets_.find(id);
  if (it == sets_.end()) {
    throw InputError(fmt::format("unknown coefficient set '{}'; available: {}", id,
                                 fmt::join(ids(), ", ")));
  }
  return it->second;
}

std::vector<std::string> CoefficientLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, set] : sets_) out.push_back(id);
  return out;
}

const SellmeierSet& builtin_set(std::string_view id) {
  static const CoefficientLibrary lib = CoefficientLibrary::builtin();
  return lib.get(id);
}

double refractive_index(Axis axis, double lambda_um, double T_C, const SellmeierSet& set) {
  if (!(lambda_um >= set.lambda_min_um && lambda_um <= set.lambda_max_um)) {
    throw DomainError(fmt::format("wavelength {} um outside the '{}' validity range [{}, {}] um",
                                  lambda_um, set.id, set.lambda_min_um, set.lambda_max_um));
  }
  const AxisCoefficients& c = set.axis(axis);
  const double dT = T_C - c.thermo_reference_C;
  return sellmeier_index(c, lambda_um) + inverse_power_poly(c.thermo_linear, lambda_um) * dT +
         inverse_power_poly(c.thermo_quadratic, lambda_um) * dT * dT;
}

double group_index(Axis axis, double lambda_um, double T_C, const SellmeierSet& set, double step_um) {
  if (lambda_um - step_um < set.lambda_min_um || lambda_um + step_um > set.lambda_max_um) {
    throw DomainError(fmt::format(
        "wavelength {} um within one derivative step of the '{}' validity range [{}, {}] um",
        lambda_um, set.id, set.lambda_min_um, set.lambda_max_um));
  }
  const double n = refractive_index(axis, lambda_um, T_C, set);
  const double dn = (refractive_index(axis, lambda_um + step_um, T_C, set) -
                     refractive_index(axis, lambda_um - step_um, T_C, set)) /
                    (2.0 * step_um);
  return n - lambda_um * dn;
}

double thermal_scale(double T_C, const SellmeierSet& set) {
  const double dT = T_C - set.expansion_reference_C;
  return 1.0 + set.expansion_alpha * dT + set.expansion_beta * dT * dT;
}

void CrystalSpec::validate() const {
  if (!(period_um > 0.0)) throw InputError("poling period must be positive");
  if (!(length_mm > 0.0)) throw InputError("crystal length must be positive");
}

double CrystalSpec::grating_wavenumber(double T_C) const {
  const double scale = thermal_scale(T_C, sellmeier) / thermal_scale(reference_temperature_C, sellmeier);
  return 2.0 * numerics::kPi / (period_um * scale);
}

double CrystalSpec::length_um(double T_C) const {
  const double scale = thermal_scale(T_C, sellmeier) / thermal_scale(reference_temperature_C, sellmeier);
  return length_mm * 1000.0 * scale;
}

CrystalSpec default_crystal(std::string_view set_id) {
  CrystalSpec c;
  c.sellmeier = builtin_set(set_id);
  c.reference_temperature_C = c.sellmeier.expansion_reference_C;
  return c;
}

}  // namespace ppktp::dispersion
