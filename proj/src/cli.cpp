#include "ppktp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ppktp/config.hpp"
#include "ppktp/emission_geometry.hpp"
#include "ppktp/errors.hpp"
#include "ppktp/numerics.hpp"
#include "ppktp/polarization_optics.hpp"
#include "ppktp/rates_stability.hpp"
#include "ppktp/tomography.hpp"

namespace ppktp::cli {

namespace {

namespace fs = std::filesystem;
using config::RunConfig;
using nlohmann::json;
using phasematch::Polarization;

struct Context {
  RunConfig cfg;
  dispersion::CrystalSpec crystal;
  phasematch::PumpSpec pump;
  fs::path out_dir;
  std::string command;
  std::ostream& out;
  std::ostream& err;
};

struct Column {
  std::string name;
  std::string unit;
};

using Row = std::vector<std::string>;
using Summary = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::vector<double> grid(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + static_cast<double>(i) * step;
  return xs;
}

std::string coefficient_source(const Context& ctx) {
  return fmt::format("{}: {}", ctx.crystal.sellmeier.id, ctx.crystal.sellmeier.description);
}

std::string header(const Context& ctx, const Summary& summary) {
  std::string h = fmt::format("# ppktp {}\n# config_hash = {}\n# coefficient_source = {}\n", ctx.command,
                              config::config_hash(ctx.cfg), coefficient_source(ctx));
  for (const auto& [k, v] : summary) h += fmt::format("# {} = {}\n", k, v);
  return h + config::metadata_block(ctx.cfg);
}

fs::path write_csv(const Context& ctx, const std::string& name, const std::vector<Column>& columns,
                   const std::vector<Row>& rows, const Summary& summary) {
  const fs::path path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
  std::string units;
  for (const auto& c : columns) units += fmt::format("{}{} [{}]", units.empty() ? "" : ", ", c.name, c.unit);
  f << header(ctx, summary) << "# units = " << units << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i].name;
  f << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  ctx.out << fmt::format("wrote {}\n", path.string());
  return path;
}

fs::path write_json(const Context& ctx, const std::string& name, json body) {
  body["metadata"] = {{"command", ctx.command},
                      {"config_hash", config::config_hash(ctx.cfg)},
                      {"coefficient_source", coefficient_source(ctx)},
                      {"config", config::serialize(ctx.cfg)}};
  const fs::path path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
  f << body.dump(2) << "\n";
  ctx.out << fmt::format("wrote {}\n", path.string());
  return path;
}

void print_summary(const Context& ctx, const Summary& summary) {
  for (const auto& [k, v] : summary) ctx.out << k << " = " << v << "\n";
}

// Evaluates f, turning model-level failures into an empty cell.
template <class F>
std::optional<double> try_point(F&& f, int& gaps) {
  try {
    return f();
  } catch (const NoPhaseMatch&) {
  } catch (const ApproximationViolated&) {
  } catch (const NumericalFailure&) {
  } catch (const DomainError&) {
  }
  ++gaps;
  return std::nullopt;
}

std::string cell(const std::optional<double>& v) { return v ? num(*v) : ""; }

int cmd_tdc(Context& ctx) {
  const auto lib = config::coefficient_library(ctx.cfg);
  std::vector<Row> rows;
  ctx.out << fmt::format("{:<18} {:>10}  {}\n", "set", "T_dc [C]", "source");
  std::optional<double> selected;
  std::string selected_error;
  for (const auto& id : lib.ids()) {
    dispersion::CrystalSpec crystal = ctx.crystal;
    crystal.sellmeier = lib.get(id);
    std::optional<double> t;
    std::string note;
    try {
      t = phasematch::solve_degenerate_collinear_T(crystal, ctx.pump);
    } catch (const std::runtime_error& e) {
      note = e.what();
    }
    const bool is_selected = id == ctx.cfg.coefficient_set;
    if (is_selected) {
      selected = t;
      selected_error = note;
    }
    rows.push_back({id, cell(t), is_selected ? "1" : "0"});
    ctx.out << fmt::format("{:<18} {:>10}  {}{}\n", id, t ? fmt::format("{:.4f}", *t) : "-",
                           crystal.sellmeier.description, is_selected ? " (selected)" : "");
  }
  Summary summary{{"pump_nm", num(ctx.pump.wavelength_nm)}};
  if (selected) summary.emplace_back("T_dc_C", num(*selected));
  write_csv(ctx, "tdc.csv", {{"set", "-"}, {"T_dc_C", "C"}, {"selected", "-"}}, rows, summary);
  if (!selected) throw NoPhaseMatch(fmt::format("{}: {}", ctx.cfg.coefficient_set, selected_error));
  return kSuccess;
}

int sweep_tuning(Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<Row> rows;
  std::vector<double> ts, lh, lv;
  int gaps = 0;
  for (double T : grid(c.t_min_C, c.t_max_C, c.t_step_C)) {
    std::optional<std::pair<double, double>> pair;
    try_point([&] {
      pair = spectrum::center_wavelengths(T, c.theta_mode_deg, ctx.crystal, ctx.pump);
      return 0.0;
    }, gaps);
    if (pair) {
      ts.push_back(T);
      lh.push_back(pair->first);
      lv.push_back(pair->second);
      rows.push_back({num(T), num(pair->first), num(pair->second)});
    } else {
      rows.push_back({num(T), "", ""});
    }
  }
  Summary summary{{"points", std::to_string(ts.size())}, {"gaps", std::to_string(gaps)}};
  if (ts.size() >= 2) {
    const auto fh = numerics::fit_line(ts, lh);
    const auto fv = numerics::fit_line(ts, lv);
    summary.emplace_back("slope_H_nm_per_C", num(fh.slope));
    summary.emplace_back("slope_V_nm_per_C", num(fv.slope));
  }
  write_csv(ctx, "tuning.csv", {{"T_C", "C"}, {"lambda_H_nm", "nm"}, {"lambda_V_nm", "nm"}}, rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_bandwidth(Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<Row> rows;
  int gaps = 0;
  for (double T : grid(c.t_min_C, c.t_max_C, c.t_step_C)) {
    auto fwhm = [&](Polarization pol) {
      return try_point([&] { return spectrum::bandwidth(T, c.theta_mode_deg, pol, ctx.crystal, ctx.pump); }, gaps);
    };
    rows.push_back({num(T), cell(fwhm(Polarization::H)), cell(fwhm(Polarization::V))});
  }
  Summary summary{{"gaps", std::to_string(gaps)}};
  const auto at_t = try_point(
      [&] { return spectrum::bandwidth(c.temperature_C, c.theta_mode_deg, Polarization::H, ctx.crystal, ctx.pump); },
      gaps);
  if (at_t) summary.emplace_back(fmt::format("fwhm_H_nm_at_{}C", num(c.temperature_C)), num(*at_t));
  write_csv(ctx, "bandwidth.csv", {{"T_C", "C"}, {"fwhm_H_nm", "nm"}, {"fwhm_V_nm", "nm"}}, rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_angle(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto plane = config::plane(c);
  std::vector<Row> rows;
  int gaps = 0;
  for (double l : grid(c.lambda_min_nm, c.lambda_max_nm, c.lambda_step_nm)) {
    std::optional<phasematch::PhaseMatchPoint> p;
    try_point([&] {
      p = phasematch::noncollinear_emission_angle(l, c.temperature_C, plane, ctx.crystal, ctx.pump);
      return 0.0;
    }, gaps);
    if (p)
      rows.push_back({num(l), num(p->theta_H_deg), num(p->lambda_V_nm), num(p->theta_V_deg)});
    else
      rows.push_back({num(l), "", "", ""});
  }
  Summary summary{{"T_C", num(c.temperature_C)}, {"plane", c.plane}, {"gaps", std::to_string(gaps)}};
  int ignored = 0;
  if (auto s = try_point([&] {
        return phasematch::angle_wavelength_slope(c.temperature_C, plane, ctx.crystal, ctx.pump).value;
      }, ignored))
    summary.emplace_back("dtheta_dlambda_deg_per_nm", num(*s));
  if (auto s = try_point([&] {
        return phasematch::partner_angle_slope(c.temperature_C, plane, ctx.crystal, ctx.pump).value;
      }, ignored))
    summary.emplace_back("partner_slope_urad_per_nm", num(*s));
  write_csv(ctx, "angle.csv",
            {{"lambda_H_nm", "nm"}, {"theta_H_deg", "deg"}, {"lambda_V_nm", "nm"}, {"theta_V_deg", "deg"}}, rows,
            summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_ring(Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<Row> rows;
  Summary summary{{"T_C", num(c.temperature_C)}, {"lambda_nm", num(c.lambda_nm)}};
  for (Polarization pol : {Polarization::H, Polarization::V}) {
    const std::string name(phasematch::to_string(pol));
    try {
      const auto ring = emission_geometry::ring_curve(c.temperature_C, c.lambda_nm, pol, ctx.crystal, ctx.pump,
                                                      c.azimuth_samples);
      for (std::size_t i = 0; i < ring.points.size(); ++i)
        rows.push_back({name, std::to_string(i), num(ring.points[i].y_deg), num(ring.points[i].z_deg)});
      summary.emplace_back("semi_axis_y_deg_" + name, num(ring.semi_axis_y_deg));
      summary.emplace_back("semi_axis_z_deg_" + name, num(ring.semi_axis_z_deg));
      summary.emplace_back("ellipticity_" + name, num(emission_geometry::ellipticity(ring)));
    } catch (const std::runtime_error& e) {
      summary.emplace_back("gap_" + name, e.what());
    }
  }
  write_csv(ctx, "ring.csv", {{"pol", "-"}, {"index", "-"}, {"y_deg", "deg"}, {"z_deg", "deg"}}, rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_cross_section(Context& ctx) {
  const auto& c = ctx.cfg;
  spectrum::FilterSpec filter{c.filter_center_nm, c.filter_fwhm_nm,
                              c.filter_shape == "top_hat" ? spectrum::FilterShape::top_hat
                                                          : spectrum::FilterShape::gaussian};
  std::vector<emission_geometry::CrossSection> scans;
  for (Polarization pol : {Polarization::H, Polarization::V})
    scans.push_back(emission_geometry::cross_section_scan(c.temperature_C, filter, pol, ctx.crystal, ctx.pump,
                                                          c.y_min_deg, c.y_max_deg, c.y_step_deg));
  emission_geometry::normalize_profiles(scans);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < scans[0].points.size(); ++i)
    rows.push_back({num(scans[0].points[i].y_deg), num(scans[0].points[i].intensity),
                    num(scans[1].points[i].intensity)});
  Summary summary{{"T_C", num(c.temperature_C)},
                  {"peak_H_deg", num(emission_geometry::peak_angle(scans[0]))},
                  {"peak_V_deg", num(emission_geometry::peak_angle(scans[1]))}};
  write_csv(ctx, "cross_section.csv", {{"y_deg", "deg"}, {"H", "normalized"}, {"V", "normalized"}}, rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_hom(Context& ctx) {
  namespace po = polarization_optics;
  const auto& c = ctx.cfg;
  po::HomParams params{c.phi_rad, c.lambda_a_nm, c.lambda_b_nm, c.hom_bandwidth_nm,
                       c.envelope == "sinc2" ? po::EnvelopeShape::sinc2 : po::EnvelopeShape::gaussian};
  const auto trace = po::hom_scan(params, c.lp_a_deg, c.lp_b_deg, c.delay_min_fs, c.delay_max_fs, c.delay_step_fs);
  std::vector<Row> rows;
  double lo = 1.0, hi = 0.0;
  for (const auto& p : trace) {
    rows.push_back({num(p.x), num(p.x * numerics::kSpeedOfLight_um_per_fs), num(p.probability)});
    lo = std::min(lo, p.probability);
    hi = std::max(hi, p.probability);
  }
  const double dw = po::beat_angular_frequency(c.lambda_a_nm, c.lambda_b_nm);
  Summary summary{{"envelope", c.envelope},
                  {"P_min", num(lo)},
                  {"P_max", num(hi)},
                  {"beat_period_fs", dw == 0.0 ? "inf" : num(2.0 * numerics::kPi / std::abs(dw))}};
  int ignored = 0;
  if (auto d = try_point([&] { return po::compensator_delay(c.temperature_C, ctx.crystal, c.lambda_a_nm); }, ignored))
    summary.emplace_back("compensator_offset_um", num(*d));
  write_csv(ctx, "hom.csv", {{"delay_fs", "fs"}, {"path_um", "um"}, {"probability", "per pair"}}, rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int sweep_stability(Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<Row> rows;
  constexpr int kSteps = 50;
  for (int i = 0; i <= kSteps; ++i) {
    const double dl = c.delta_lambda_nm * i / kSteps;
    const auto r = rates_stability::phase_fluctuation(dl, ctx.pump.wavelength_nm, c.m, c.dl_um);
    rows.push_back({num(dl), num(r.lambda_A_nm), num(r.lambda_B_nm), num(r.phase_rad), num(r.fraction_of_2pi)});
  }
  const auto r = rates_stability::phase_fluctuation(c.delta_lambda_nm, ctx.pump.wavelength_nm, c.m, c.dl_um);
  Summary summary{{"delta_lambda_nm", num(c.delta_lambda_nm)},
                  {"phase_rad", num(r.phase_rad)},
                  {"phase_fraction_of_2pi", num(r.fraction_of_2pi)}};
  write_csv(ctx, "stability.csv",
            {{"delta_lambda_nm", "nm"},
             {"lambda_A_nm", "nm"},
             {"lambda_B_nm", "nm"},
             {"phase_rad", "rad"},
             {"fraction_of_2pi", "-"}},
            rows, summary);
  print_summary(ctx, summary);
  return kSuccess;
}

int cmd_tomo(Context& ctx) {
  const auto& c = ctx.cfg;
  tomography::TomographyRecord record;
  if (!c.tomo_input.empty()) {
    record = tomography::load_record(c.tomo_input);
  } else {
    const Matrix4c rho = c.simulate == "bell" ? projector(phi_plus()) : werner_state(c.werner_p);
    record = tomography::simulate_counts(TwoQubitDensityMatrix(rho), c.counts_per_setting,
                                         c.noise == "poisson" ? tomography::Noise::poisson : tomography::Noise::none,
                                         c.seed);
    const fs::path path = ctx.out_dir / "tomo_counts.csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    f << header(ctx, {});
    tomography::write_record(f, record);
    ctx.out << fmt::format("wrote {}\n", path.string());
  }

  const Matrix4c linear = tomography::linear_reconstruct(record);
  tomography::MleOptions options;
  options.likelihood = c.likelihood == "poisson" ? tomography::Likelihood::poisson : tomography::Likelihood::gaussian;
  options.restarts = c.restarts;
  options.seed = c.seed;
  tomography::MleResult result = [&] {
    try {
      return tomography::mle_reconstruct(record, options);
    } catch (const tomography::MleNotConverged& e) {
      const auto& d = e.diagnostics();
      ctx.err << fmt::format("diagnostics: starts={} iterations={} cost={} gradient={} ({})\n", d.starts,
                             d.iterations, d.cost, d.gradient_norm, d.message);
      ctx.err << "best iterate: " << tomography::density_to_json(e.best()).dump() << "\n";
      throw;
    }
  }();

  const double conc = tomography::concurrence(result.rho);
  const double fid = tomography::fidelity(result.rho, phi_plus());
  const double pur = tomography::purity(result.rho);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(linear, Eigen::EigenvaluesOnly);
  json body{{"rho", tomography::density_to_json(result.rho.matrix())},
            {"linear_rho", tomography::density_to_json(linear)},
            {"linear_min_eigenvalue", es.eigenvalues().minCoeff()},
            {"concurrence", conc},
            {"fidelity_phi_plus", fid},
            {"purity", pur},
            {"mle",
             {{"converged", result.diagnostics.converged},
              {"closed_form", result.diagnostics.closed_form},
              {"starts", result.diagnostics.starts},
              {"iterations", result.diagnostics.iterations},
              {"cost", result.diagnostics.cost},
              {"message", result.diagnostics.message}}}};
  write_json(ctx, "tomo.json", body);
  print_summary(ctx, {{"concurrence", num(conc)}, {"fidelity_phi_plus", num(fid)}, {"purity", num(pur)}});
  return kSuccess;
}

int cmd_rates(Context& ctx) {
  namespace rs = rates_stability;
  const auto& c = ctx.cfg;
  const rs::LossBudget arm{c.polarizer_efficiency, c.detector_efficiency, c.coupling_efficiency};
  rs::BrightnessReport report;
  if (!c.rates_input.empty()) {
    std::ifstream in(c.rates_input);
    if (!in) throw InputError(fmt::format("cannot open coincidence file '{}'", c.rates_input));
    report = rs::brightness(rs::parse_coincidence_csv(in), arm, arm);
  } else {
    report = rs::brightness({{"HH", c.rate_HH_kHz_per_mW},
                             {"VV", c.rate_VV_kHz_per_mW},
                             {"HV", c.rate_HV_kHz_per_mW},
                             {"VH", c.rate_VH_kHz_per_mW}},
                            arm, arm);
  }
  const double spectral = rs::spectral_rate(report.pair_rate_kHz_per_mW, c.rates_bandwidth_nm);
  const double scaled = rs::length_scaling(spectral, c.length_mm, c.scaled_length_mm);
  json body = rs::report_to_json(report);
  body["spectral_rate_kHz_per_mW_per_nm"] = spectral;
  body["scaled_spectral_rate_kHz_per_mW_per_nm"] = scaled;
  body["scaled_length_mm"] = c.scaled_length_mm;
  write_json(ctx, "rates.json", body);
  print_summary(ctx, {{"detected_kHz_per_mW", num(report.detected_kHz_per_mW)},
                      {"leakage_kHz_per_mW", num(report.leakage_kHz_per_mW)},
                      {"pair_rate_kHz_per_mW", num(report.pair_rate_kHz_per_mW)},
                      {"spectral_rate_kHz_per_mW_per_nm", num(spectral)},
                      {fmt::format("scaled_rate_{}mm_kHz_per_mW_per_nm", num(c.scaled_length_mm)), num(scaled)}});
  return kSuccess;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design and analysis toolkit for type-II PPKTP photon-pair sources", "ppktp"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config_file;
  app.add_option("--config", config_file, "INI run configuration");

  RunConfig scratch;
  const auto table = config::fields(scratch);
  std::vector<std::string> values(table.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < table.size(); ++i)
    options.push_back(app.add_option(fmt::format("--{}", table[i].flag), values[i],
                                     fmt::format("{} [{}.{}]", table[i].help, table[i].section, table[i].key)));

  auto* tdc = app.add_subcommand("tdc", "degenerate collinear temperature for each coefficient set");
  std::string kind;
  auto* sweep = app.add_subcommand("sweep", "parameter sweeps written as CSV");
  sweep->add_option("kind", kind, "tuning, bandwidth, angle, ring, cross-section, hom or stability")
      ->required()
      ->check(CLI::IsMember({"tuning", "bandwidth", "angle", "ring", "cross-section", "hom", "stability"}));
  auto* tomo = app.add_subcommand("tomo", "state reconstruction from a record file or simulated counts");
  auto* rates = app.add_subcommand("rates", "brightness and spectral-rate accounting");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  RunConfig cfg = config_file.empty() ? RunConfig{} : config::load_config(config_file);
  auto bound = config::fields(cfg);
  for (std::size_t i = 0; i < bound.size(); ++i)
    if (options[i]->count() > 0) config::assign(bound[i], values[i]);
  config::validate(cfg);

  Context ctx{cfg, config::crystal(cfg), config::pump(cfg), fs::path(cfg.output_dir), "", out, err};
  fs::create_directories(ctx.out_dir);

  if (tdc->parsed()) {
    ctx.command = "tdc";
    return cmd_tdc(ctx);
  }
  if (tomo->parsed()) {
    ctx.command = "tomo";
    return cmd_tomo(ctx);
  }
  if (rates->parsed()) {
    ctx.command = "rates";
    return cmd_rates(ctx);
  }
  ctx.command = "sweep " + kind;
  if (kind == "tuning") return sweep_tuning(ctx);
  if (kind == "bandwidth") return sweep_bandwidth(ctx);
  if (kind == "angle") return sweep_angle(ctx);
  if (kind == "ring") return sweep_ring(ctx);
  if (kind == "cross-section") return sweep_cross_section(ctx);
  if (kind == "hom") return sweep_hom(ctx);
  return sweep_stability(ctx);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace ppktp::cli
