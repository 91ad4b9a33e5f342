#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppktp/cli.hpp"
#include "ppktp/emission_geometry.hpp"
#include "ppktp/errors.hpp"
#include "ppktp/polarization_optics.hpp"
#include "ppktp/rates_stability.hpp"
#include "ppktp/tomography.hpp"

namespace py = pybind11;
using namespace ppktp;
using dispersion::CrystalSpec;
using phasematch::Plane;
using phasematch::Polarization;
using phasematch::PumpSpec;

namespace {

dispersion::Axis axis_from(const std::string& s) {
  if (s == "x") return dispersion::Axis::x;
  if (s == "y") return dispersion::Axis::y;
  if (s == "z") return dispersion::Axis::z;
  throw InputError("axis must be 'x', 'y' or 'z'");
}

Plane plane_from(const std::string& s) {
  if (s == "xy") return Plane::xy;
  if (s == "xz") return Plane::xz;
  throw InputError("plane must be 'xy' or 'xz'");
}

Polarization pol_from(const std::string& s) {
  if (s == "H") return Polarization::H;
  if (s == "V") return Polarization::V;
  throw InputError("polarization must be 'H' or 'V'");
}

tomography::TomographyRecord record_from(const std::vector<double>& counts) {
  if (counts.size() != tomography::kSettings) throw InputError("expected 16 counts in projector_labels() order");
  tomography::TomographyRecord rec;
  std::copy(counts.begin(), counts.end(), rec.counts.begin());
  return rec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core numerics for type-II PPKTP photon-pair sources";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NoPhaseMatch>(m, "NoPhaseMatch", PyExc_RuntimeError);
  py::register_exception<ApproximationViolated>(m, "ApproximationViolated", PyExc_RuntimeError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);

  py::class_<CrystalSpec>(m, "Crystal")
      .def(py::init([](const std::string& set, double period_um, double length_mm) {
             CrystalSpec c = dispersion::default_crystal(set);
             c.period_um = period_um;
             c.length_mm = length_mm;
             c.validate();
             return c;
           }),
           py::arg("coefficient_set") = std::string(dispersion::kDefaultSetId), py::arg("period_um") = 10.0,
           py::arg("length_mm") = 10.0)
      .def_readwrite("period_um", &CrystalSpec::period_um)
      .def_readwrite("length_mm", &CrystalSpec::length_mm)
      .def_property_readonly("coefficient_set", [](const CrystalSpec& c) { return c.sellmeier.id; })
      .def("__repr__", [](const CrystalSpec& c) {
        return "Crystal('" + c.sellmeier.id + "', period_um=" + std::to_string(c.period_um) +
               ", length_mm=" + std::to_string(c.length_mm) + ")";
      });

  py::class_<PumpSpec>(m, "Pump")
      .def(py::init([](double wavelength_nm, double power_mW) {
             PumpSpec p;
             p.wavelength_nm = wavelength_nm;
             p.power_mW = power_mW;
             p.validate();
             return p;
           }),
           py::arg("wavelength_nm") = 406.2, py::arg("power_mW") = 1.0)
      .def_readwrite("wavelength_nm", &PumpSpec::wavelength_nm)
      .def_readwrite("power_mW", &PumpSpec::power_mW);

  const CrystalSpec crystal0 = dispersion::default_crystal();
  const PumpSpec pump0;

  m.def("coefficient_sets", [] { return dispersion::CoefficientLibrary::builtin().ids(); });
  m.def(
      "refractive_index",
      [](const std::string& axis, double lambda_um, double T_C, const std::string& set) {
        return dispersion::refractive_index(axis_from(axis), lambda_um, T_C, dispersion::builtin_set(set));
      },
      py::arg("axis"), py::arg("lambda_um"), py::arg("T_C"),
      py::arg("coefficient_set") = std::string(dispersion::kDefaultSetId));
  m.def(
      "group_index",
      [](const std::string& axis, double lambda_um, double T_C, const std::string& set) {
        return dispersion::group_index(axis_from(axis), lambda_um, T_C, dispersion::builtin_set(set));
      },
      py::arg("axis"), py::arg("lambda_um"), py::arg("T_C"),
      py::arg("coefficient_set") = std::string(dispersion::kDefaultSetId));

  m.def("degenerate_collinear_temperature", &phasematch::solve_degenerate_collinear_T, py::arg("crystal") = crystal0,
        py::arg("pump") = pump0, py::arg("T_lo_C") = 20.0, py::arg("T_hi_C") = 200.0);
  m.def(
      "noncollinear_emission_angle",
      [](double lambda_nm, double T_C, const std::string& plane, const CrystalSpec& c, const PumpSpec& p) {
        const auto pt = phasematch::noncollinear_emission_angle(lambda_nm, T_C, plane_from(plane), c, p);
        return py::dict(py::arg("lambda_H_nm") = pt.lambda_H_nm, py::arg("lambda_V_nm") = pt.lambda_V_nm,
                        py::arg("theta_H_deg") = pt.theta_H_deg, py::arg("theta_V_deg") = pt.theta_V_deg);
      },
      py::arg("lambda_nm"), py::arg("T_C"), py::arg("plane") = "xy", py::arg("crystal") = crystal0,
      py::arg("pump") = pump0);
  m.def(
      "angle_wavelength_slope",
      [](double T_C, const std::string& plane, const CrystalSpec& c, const PumpSpec& p) {
        return phasematch::angle_wavelength_slope(T_C, plane_from(plane), c, p).value;
      },
      py::arg("T_C"), py::arg("plane") = "xy", py::arg("crystal") = crystal0, py::arg("pump") = pump0);
  m.def(
      "partner_angle_slope",
      [](double T_C, const std::string& plane, const CrystalSpec& c, const PumpSpec& p) {
        return phasematch::partner_angle_slope(T_C, plane_from(plane), c, p).value;
      },
      py::arg("T_C"), py::arg("plane") = "xy", py::arg("crystal") = crystal0, py::arg("pump") = pump0);

  m.def("center_wavelengths", &spectrum::center_wavelengths, py::arg("T_C"), py::arg("theta_mode_deg") = 0.85,
        py::arg("crystal") = crystal0, py::arg("pump") = pump0);
  m.def(
      "bandwidth",
      [](double T_C, double theta, const std::string& pol, const CrystalSpec& c, const PumpSpec& p) {
        return spectrum::bandwidth(T_C, theta, pol_from(pol), c, p);
      },
      py::arg("T_C"), py::arg("theta_mode_deg") = 0.85, py::arg("pol") = "H", py::arg("crystal") = crystal0,
      py::arg("pump") = pump0);
  m.def(
      "tuning_slope",
      [](double t_min, double t_max, double t_step, double theta, const CrystalSpec& c, const PumpSpec& p) {
        const auto r = spectrum::tuning_slope(t_min, t_max, t_step, theta, c, p);
        return std::make_pair(r.slope_H, r.slope_V);
      },
      py::arg("T_min_C"), py::arg("T_max_C"), py::arg("T_step_C") = 1.0, py::arg("theta_mode_deg") = 0.85,
      py::arg("crystal") = crystal0, py::arg("pump") = pump0);
  m.def(
      "ring_ellipticity",
      [](double T_C, double lambda_nm, const std::string& pol, const CrystalSpec& c, const PumpSpec& p) {
        return emission_geometry::ellipticity(emission_geometry::ring_curve(T_C, lambda_nm, pol_from(pol), c, p));
      },
      py::arg("T_C"), py::arg("lambda_nm"), py::arg("pol") = "H", py::arg("crystal") = crystal0,
      py::arg("pump") = pump0);

  namespace po = polarization_optics;
  m.def(
      "waveplate",
      [](const std::string& kind, double angle_deg) {
        if (kind != "HWP" && kind != "QWP") throw InputError("kind must be 'HWP' or 'QWP'");
        return po::waveplate(kind == "HWP" ? po::WaveplateKind::HWP : po::WaveplateKind::QWP, angle_deg);
      },
      py::arg("kind"), py::arg("angle_deg"));
  m.def("phase_shifter", &po::phase_shifter, py::arg("hwp_angle_deg"));
  m.def("compensator_delay", &po::compensator_delay, py::arg("T_C"), py::arg("crystal") = crystal0,
        py::arg("lambda_nm") = 812.4);
  m.def(
      "hom_scan",
      [](double phi, double lambda_a, double lambda_b, double bw, double lp_a, double lp_b, double t0, double t1,
         double dt, const std::string& envelope) {
        if (envelope != "gaussian" && envelope != "sinc2") throw InputError("envelope must be gaussian or sinc2");
        po::HomParams params{phi, lambda_a, lambda_b, bw,
                             envelope == "sinc2" ? po::EnvelopeShape::sinc2 : po::EnvelopeShape::gaussian};
        std::vector<double> x, y;
        for (const auto& p : po::hom_scan(params, lp_a, lp_b, t0, t1, dt)) {
          x.push_back(p.x);
          y.push_back(p.probability);
        }
        return std::make_pair(x, y);
      },
      py::arg("phi_rad") = 0.0, py::arg("lambda_a_nm") = 812.4, py::arg("lambda_b_nm") = 812.4,
      py::arg("bandwidth_nm") = 0.553, py::arg("lp_a_deg") = 45.0, py::arg("lp_b_deg") = -45.0,
      py::arg("delay_min_fs") = -6000.0, py::arg("delay_max_fs") = 6000.0, py::arg("delay_step_fs") = 10.0,
      py::arg("envelope") = "gaussian");
  m.def("coincidence_probability", &po::coincidence_probability, py::arg("rho"), py::arg("lp_a_deg"),
        py::arg("lp_b_deg"));

  m.def("phi_state", &phi_state, py::arg("phase_rad") = 0.0);
  m.def("werner_state", &werner_state, py::arg("p"));
  m.def("projector_labels", [] {
    std::vector<std::string> labels;
    for (const auto& p : tomography::projector_set()) labels.push_back(p.label);
    return labels;
  });
  m.def(
      "simulate_counts",
      [](const Matrix4c& rho, double n, const std::string& noise, std::uint64_t seed) {
        if (noise != "none" && noise != "poisson") throw InputError("noise must be 'none' or 'poisson'");
        const auto rec = tomography::simulate_counts(
            TwoQubitDensityMatrix(rho), n, noise == "none" ? tomography::Noise::none : tomography::Noise::poisson,
            seed);
        return std::vector<double>(rec.counts.begin(), rec.counts.end());
      },
      py::arg("rho"), py::arg("counts_per_setting"), py::arg("noise") = "none", py::arg("seed") = 0);
  m.def(
      "linear_reconstruct", [](const std::vector<double>& counts) { return tomography::linear_reconstruct(record_from(counts)); },
      py::arg("counts"));
  m.def(
      "mle_reconstruct",
      [](const std::vector<double>& counts, const std::string& likelihood, std::uint64_t seed) {
        if (likelihood != "gaussian" && likelihood != "poisson")
          throw InputError("likelihood must be 'gaussian' or 'poisson'");
        tomography::MleOptions o;
        o.likelihood = likelihood == "poisson" ? tomography::Likelihood::poisson : tomography::Likelihood::gaussian;
        o.seed = seed;
        return tomography::mle_reconstruct(record_from(counts), o).rho.matrix();
      },
      py::arg("counts"), py::arg("likelihood") = "gaussian", py::arg("seed") = 0);
  m.def(
      "concurrence", [](const Matrix4c& rho) { return tomography::concurrence(TwoQubitDensityMatrix(rho)); },
      py::arg("rho"));
  m.def(
      "fidelity",
      [](const Matrix4c& rho, const Vector4c& psi) { return tomography::fidelity(TwoQubitDensityMatrix(rho), psi); },
      py::arg("rho"), py::arg("target"));
  m.def(
      "purity", [](const Matrix4c& rho) { return tomography::purity(TwoQubitDensityMatrix(rho)); }, py::arg("rho"));

  namespace rs = rates_stability;
  m.def("accidental_rate", &rs::accidental_rate, py::arg("singles_A_Hz"), py::arg("singles_B_Hz"),
        py::arg("window_s"));
  m.def(
      "brightness",
      [](const std::map<std::string, double>& rates, double polarizer, double detector, double coupling) {
        const rs::LossBudget arm{polarizer, detector, coupling};
        const auto r = rs::brightness(rates, arm, arm);
        return py::dict(py::arg("detected_kHz_per_mW") = r.detected_kHz_per_mW,
                        py::arg("leakage_kHz_per_mW") = r.leakage_kHz_per_mW,
                        py::arg("pair_rate_kHz_per_mW") = r.pair_rate_kHz_per_mW);
      },
      py::arg("per_combination_kHz_per_mW"), py::arg("polarizer") = 1.0, py::arg("detector") = 1.0,
      py::arg("coupling") = 1.0);
  m.def("spectral_rate", &rs::spectral_rate, py::arg("rate"), py::arg("bandwidth_nm"));
  m.def("length_scaling", &rs::length_scaling, py::arg("rate"), py::arg("length_from_mm"), py::arg("length_to_mm"));
  m.def(
      "phase_fluctuation",
      [](double dl, double pump_nm, int m_, double dl_um) {
        const auto r = rs::phase_fluctuation(dl, pump_nm, m_, dl_um);
        return py::dict(py::arg("phase_rad") = r.phase_rad, py::arg("fraction_of_2pi") = r.fraction_of_2pi,
                        py::arg("lambda_A_nm") = r.lambda_A_nm, py::arg("lambda_B_nm") = r.lambda_B_nm);
      },
      py::arg("delta_lambda_nm"), py::arg("pump_nm") = 406.2, py::arg("m") = 5, py::arg("dl_um") = 0.1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a ppktp command line; returns (exit_code, stdout, stderr).");
}
