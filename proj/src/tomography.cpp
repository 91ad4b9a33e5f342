#include "ppktp/tomography.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ppktp/numerics.hpp"

namespace ppktp::tomography {

namespace {

constexpr Complex kI{0.0, 1.0};

Vector2c single(char c) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (c) {
    case 'H': return Vector2c(1.0, 0.0);
    case 'V': return Vector2c(0.0, 1.0);
    case 'D': return Vector2c(s, s);
    case 'R': return Vector2c(s, -kI * s);
    case 'L': return Vector2c(s, kI * s);
  }
  throw InputError(fmt::format("unknown polarization '{}'", c));
}

Vector4c product(const Vector2c& a, const Vector2c& b) {
  Vector4c v;
  v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return v;
}

std::array<Matrix2c, 4> pauli() {
  std::array<Matrix2c, 4> s;
  s[0] << 1, 0, 0, 1;
  s[1] << 0, 1, 1, 0;
  s[2] << 0, -kI, kI, 0;
  s[3] << 1, 0, 0, -1;
  return s;
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

const std::array<Matrix4c, 16>& pauli_basis() {
  static const std::array<Matrix4c, 16> basis = [] {
    std::array<Matrix4c, 16> out;
    const auto s = pauli();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out[4 * i + j] = kron(s[i], s[j]);
    return out;
  }();
  return basis;
}

// B(i, μ) = ⟨ψ_i|σ_μ|ψ_i⟩ / 4, so counts = N · B · r for ρ = Σ r_μ σ_μ / 4 with r_0 = 1.
const Eigen::Matrix<double, 16, 16>& design_matrix() {
  static const Eigen::Matrix<double, 16, 16> b = [] {
    Eigen::Matrix<double, 16, 16> m;
    const auto& set = projector_set();
    const auto& sigma = pauli_basis();
    for (int i = 0; i < 16; ++i)
      for (int mu = 0; mu < 16; ++mu)
        m(i, mu) = (set[i].state.adjoint() * sigma[mu] * set[i].state)(0, 0).real() / 4.0;
    return m;
  }();
  return b;
}

Matrix4c clip_to_physical(const Matrix4c& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho + rho.adjoint()));
  Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0);
  if (w.sum() <= 0.0) return Matrix4c::Identity() / 4.0;
  w /= w.sum();
  return es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// Lower-triangular T holding 16 reals: diagonal first, then (re, im) of the
// strictly-lower entries row by row.
constexpr int kParams = 16;
constexpr std::array<std::pair<int, int>, 6> kLower{{{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

Matrix4c to_T(const double* t) {
  Matrix4c T = Matrix4c::Zero();
  for (int d = 0; d < 4; ++d) T(d, d) = t[d];
  for (int k = 0; k < 6; ++k) T(kLower[k].first, kLower[k].second) = Complex(t[4 + 2 * k], t[5 + 2 * k]);
  return T;
}

// T lower triangular with T†T = M: Cholesky of the index-reversed matrix.
std::array<double, kParams> from_M(const Matrix4c& M) {
  Matrix4c rev;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rev(i, j) = M(3 - i, 3 - j);
  Eigen::LLT<Matrix4c> llt(rev);
  if (llt.info() != Eigen::Success) throw NumericalFailure("starting point is not positive definite");
  const Matrix4c L = llt.matrixL();
  Matrix4c T;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) T(i, j) = std::conj(L(3 - j, 3 - i));
  std::array<double, kParams> t{};
  for (int d = 0; d < 4; ++d) t[d] = T(d, d).real();
  for (int k = 0; k < 6; ++k) {
    const Complex z = T(kLower[k].first, kLower[k].second);
    t[4 + 2 * k] = z.real();
    t[5 + 2 * k] = z.imag();
  }
  return t;
}

class NegativeLogLikelihood final : public ceres::FirstOrderFunction {
 public:
  NegativeLogLikelihood(std::array<double, 16> data, Likelihood model, double variance_floor)
      : data_(data), model_(model), floor_(variance_floor) {}

  int NumParameters() const override { return kParams; }

  bool Evaluate(const double* t, double* cost, double* gradient) const override {
    const Matrix4c T = to_T(t);
    const auto& set = projector_set();
    *cost = 0.0;
    if (gradient) std::fill(gradient, gradient + kParams, 0.0);
    for (int i = 0; i < 16; ++i) {
      const Vector4c& psi = set[i].state;
      const Vector4c v = T * psi;
      const double m = v.squaredNorm();
      const double n = data_[i];
      double dcost_dm;
      if (model_ == Likelihood::gaussian) {
        const double var = m + floor_;
        *cost += (m - n) * (m - n) / (2.0 * var);
        dcost_dm = (m - n) / var - (m - n) * (m - n) / (2.0 * var * var);
      } else {
        const double mm = m + floor_;
        *cost += mm - (n > 0.0 ? n * std::log(mm) : 0.0);
        dcost_dm = 1.0 - n / mm;
      }
      if (!gradient) continue;
      // dm/dt = 2 Re(conj(v_r) · ∂T(r,c) · ψ_c)
      for (int d = 0; d < 4; ++d) gradient[d] += dcost_dm * 2.0 * (std::conj(v(d)) * psi(d)).real();
      for (int k = 0; k < 6; ++k) {
        const auto [r, c] = kLower[k];
        const Complex w = std::conj(v(r)) * psi(c);
        gradient[4 + 2 * k] += dcost_dm * 2.0 * w.real();
        gradient[5 + 2 * k] += dcost_dm * 2.0 * (kI * w).real();
      }
    }
    return std::isfinite(*cost);
  }

 private:
  std::array<double, 16> data_;
  Likelihood model_;
  double floor_;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, int line, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw InputError(fmt::format("invalid {} '{}'", what, text), line);
  return v;
}

}  // namespace

const std::vector<Projector>& projector_set() {
  static const std::vector<Projector> set = [] {
    std::vector<Projector> out;
    for (std::string_view label : {"HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH", "DR", "DD", "RD", "HD", "VD",
                                   "VL", "HL", "RL"})
      out.push_back({std::string(label), product(single(label[0]), single(label[1]))});
    return out;
  }();
  return set;
}

int projector_index(std::string_view label) {
  const auto& set = projector_set();
  for (int i = 0; i < kSettings; ++i)
    if (set[i].label == label) return i;
  return -1;
}

void TomographyRecord::validate() const {
  for (int i = 0; i < kSettings; ++i)
    if (!(counts[i] >= 0.0) || !std::isfinite(counts[i]))
      throw InputError(fmt::format("negative or invalid count for {}", projector_set()[i].label));
  if (!(duration_s > 0.0)) throw InputError("duration_s must be positive");
  if (!(power_mW > 0.0)) throw InputError("power_mW must be positive");
}

double TomographyRecord::total() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

TomographyRecord simulate_counts(const TwoQubitDensityMatrix& rho, double counts_per_setting, Noise noise,
                                 std::uint64_t seed) {
  if (!(counts_per_setting > 0.0)) throw InputError("counts per setting must be positive");
  TomographyRecord rec;
  std::mt19937_64 rng(seed);
  const auto& set = projector_set();
  for (int i = 0; i < kSettings; ++i) {
    const double p = std::max(0.0, (set[i].state.adjoint() * rho.matrix() * set[i].state)(0, 0).real());
    const double mean = counts_per_setting * p;
    if (noise == Noise::none || mean == 0.0) {
      rec.counts[i] = mean;
    } else {
      std::poisson_distribution<long long> draw(mean);
      rec.counts[i] = static_cast<double>(draw(rng));
    }
  }
  rec.metadata["simulated_counts_per_setting"] = fmt::format("{}", counts_per_setting);
  rec.metadata["simulated_noise"] = noise == Noise::none ? "none" : "poisson";
  rec.metadata["seed"] = fmt::format("{}", seed);
  return rec;
}

Matrix4c linear_reconstruct(const TomographyRecord& record) {
  record.validate();
  const auto& b = design_matrix();
  Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(b);
  if (lu.rank() < 16) throw NumericalFailure("projector set is not informationally complete");
  Eigen::Matrix<double, 16, 1> n;
  for (int i = 0; i < 16; ++i) n(i) = record.counts[i];
  const Eigen::Matrix<double, 16, 1> r = lu.solve(n);
  if (!(r(0) > 0.0)) throw NumericalFailure("linear inversion gives non-positive trace (no counts?)");
  Matrix4c rho = Matrix4c::Zero();
  const auto& sigma = pauli_basis();
  for (int mu = 0; mu < 16; ++mu) rho += (r(mu) / r(0)) * sigma[mu];
  rho /= 4.0;
  return 0.5 * (rho + rho.adjoint());
}

MleResult mle_reconstruct(const TomographyRecord& record, const MleOptions& options) {
  record.validate();
  const double total = record.total();
  if (!(total > 0.0)) throw InputError("tomography record has no counts");

  const Matrix4c linear = linear_reconstruct(record);
  if (TwoQubitDensityMatrix::is_valid(linear)) {
    MleDiagnostics d;
    d.converged = true;
    d.closed_form = true;
    d.message = "linear inversion is physical and fits the counts exactly";
    return {TwoQubitDensityMatrix(linear), d};
  }

  // Work in units where a typical setting has O(1) counts.
  const double scale = total / 4.0;
  std::array<double, 16> data{};
  for (int i = 0; i < 16; ++i) data[i] = record.counts[i] / scale;
  const double floor = options.likelihood == Likelihood::gaussian ? 1.0 / scale : 1e-12;

  std::vector<std::array<double, kParams>> starts;
  {
    const Matrix4c seed_rho = clip_to_physical(linear);
    starts.push_back(from_M(4.0 * (0.99 * seed_rho + 0.01 * Matrix4c::Identity() / 4.0)));
  }
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < options.restarts; ++k) {
    std::array<double, kParams> t{};
    for (double& x : t) x = normal(rng);
    starts.push_back(t);
  }

  ceres::GradientProblemSolver::Options solver_options;
  solver_options.line_search_direction_type = ceres::BFGS;
  solver_options.max_num_iterations = options.max_iterations;
  solver_options.gradient_tolerance = options.gradient_tolerance;
  solver_options.function_tolerance = 1e-15;
  solver_options.parameter_tolerance = 1e-14;
  solver_options.logging_type = ceres::SILENT;

  MleDiagnostics best;
  best.cost = std::numeric_limits<double>::infinity();
  std::array<double, kParams> best_t{};
  for (auto& t : starts) {
    ceres::GradientProblem problem(new NegativeLogLikelihood(data, options.likelihood, floor));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(solver_options, problem, t.data(), &summary);
    ++best.starts;
    best.iterations += static_cast<int>(summary.iterations.size());
    const bool ok = summary.termination_type == ceres::CONVERGENCE;
    if (!std::isfinite(summary.final_cost)) continue;
    // Converged starts win over unconverged ones, then lower cost.
    const bool better = (ok && !best.converged) || (ok == best.converged && summary.final_cost < best.cost);
    if (better) {
      best.cost = summary.final_cost;
      best.converged = ok;
      best.message = summary.message;
      best.gradient_norm = summary.iterations.empty() ? 0.0 : summary.iterations.back().gradient_norm;
      best_t = t;
    }
  }

  const Matrix4c T = to_T(best_t.data());
  Matrix4c M = T.adjoint() * T;
  const double tr = M.trace().real();
  Matrix4c rho = tr > 0.0 ? Matrix4c(M / tr) : Matrix4c(Matrix4c::Identity() / 4.0);
  rho = 0.5 * (rho + rho.adjoint());
  if (!best.converged)
    throw MleNotConverged(fmt::format("maximum-likelihood search did not converge after {} starts: {}", best.starts,
                                      best.message),
                          rho, best);
  return {TwoQubitDensityMatrix(rho), best};
}

double concurrence(const TwoQubitDensityMatrix& rho) {
  const Matrix4c& r = rho.matrix();
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c tilde = yy * r.conjugate() * yy;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(r);
  const Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c sqrt_r = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  const Matrix4c h = sqrt_r * tilde * sqrt_r;
  Eigen::SelfAdjointEigenSolver<Matrix4c> hs(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::Vector4d l = hs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::clamp(l(0) - l(1) - l(2) - l(3), 0.0, 1.0);
}

double fidelity(const TwoQubitDensityMatrix& rho, const Vector4c& target) {
  if (std::abs(target.norm() - 1.0) > 1e-10) throw InputError("fidelity target state is not normalized");
  return std::clamp((target.adjoint() * rho.matrix() * target)(0, 0).real(), 0.0, 1.0);
}

double purity(const TwoQubitDensityMatrix& rho) { return (rho.matrix() * rho.matrix()).trace().real(); }

VisibilityFit visibility_fit(const std::vector<SweepPoint>& sweep) {
  const auto n = static_cast<int>(sweep.size());
  if (n < 6) throw InputError(fmt::format("visibility fit needs at least 6 points, got {}", n));
  const auto [lo, hi] = std::minmax_element(sweep.begin(), sweep.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.angle_deg < b.angle_deg;
  });
  if (hi->angle_deg - lo->angle_deg < 90.0) throw InputError("visibility sweep must span at least 90 degrees");

  // Rows scaled by 1/sqrt(counts): Poisson-weighted least squares.
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * numerics::deg2rad(sweep[i].angle_deg);
    const double w = 1.0 / std::sqrt(std::max(sweep[i].counts, 1.0));
    X(i, 0) = w;
    X(i, 1) = w * std::sin(x);
    X(i, 2) = w * std::cos(x);
    y(i) = w * sweep[i].counts;
  }
  const Eigen::Vector3d beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double a = beta(0), p = beta(1), q = beta(2);
  if (!(a > 0.0)) throw NumericalFailure("fitted offset is not positive");

  VisibilityFit fit;
  fit.offset = a;
  fit.amplitude = std::hypot(p, q);
  fit.phase_rad = std::atan2(q, p);
  fit.visibility = fit.amplitude / a;
  double sq = 0.0;
  for (const auto& pt : sweep) {
    const double x = 2.0 * numerics::deg2rad(pt.angle_deg);
    sq += std::pow(pt.counts - (a + p * std::sin(x) + q * std::cos(x)), 2);
  }
  fit.residual_rms = std::sqrt(sq / n);

  const Eigen::Matrix3d XtX = X.transpose() * X;
  const Eigen::Matrix3d cov = (n > 3 ? rss / (n - 3) : 0.0) * XtX.inverse();
  const double b = fit.amplitude;
  // Jacobians of (b, c, V) with respect to (a, p, q).
  Eigen::RowVector3d jb(0.0, b > 0 ? p / b : 0.0, b > 0 ? q / b : 0.0);
  Eigen::RowVector3d jc(0.0, b > 0 ? -q / (b * b) : 0.0, b > 0 ? p / (b * b) : 0.0);
  Eigen::RowVector3d jv(-b / (a * a), jb(1) / a, jb(2) / a);
  fit.offset_error = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.amplitude_error = std::sqrt(std::max(0.0, (jb * cov * jb.transpose())(0, 0)));
  fit.phase_error = std::sqrt(std::max(0.0, (jc * cov * jc.transpose())(0, 0)));
  fit.visibility_error = std::sqrt(std::max(0.0, (jv * cov * jv.transpose())(0, 0)));
  return fit;
}

TomographyRecord parse_record(std::istream& in) {
  TomographyRecord rec;
  std::array<bool, kSettings> seen{};
  int entries = 0;
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const std::string body = trim(std::string_view(text).substr(1));
      const auto eq = body.find_first_of("=:");
      if (eq == std::string::npos) continue;  // free-form comment
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "duration_s") {
        rec.duration_s = parse_number(value, line, "duration_s");
      } else if (key == "power_mW") {
        rec.power_mW = parse_number(value, line, "power_mW");
      } else {
        rec.metadata[key] = value;
      }
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw InputError(fmt::format("expected 'label,count', got '{}'", text), line);
    const std::string label = trim(std::string_view(text).substr(0, comma));
    const std::string value = trim(std::string_view(text).substr(comma + 1));
    if (label == "label" && value == "count") continue;  // column header
    const int idx = projector_index(label);
    if (idx < 0) throw InputError(fmt::format("unknown projector label '{}'", label), line);
    if (seen[idx]) throw InputError(fmt::format("duplicate projector label '{}'", label), line);
    const double count = parse_number(value, line, "count");
    if (count < 0.0) throw InputError(fmt::format("negative count {} for {}", count, label), line);
    seen[idx] = true;
    rec.counts[idx] = count;
    ++entries;
  }
  if (entries != kSettings) {
    std::string missing;
    for (int i = 0; i < kSettings; ++i)
      if (!seen[i]) missing += (missing.empty() ? "" : " ") + projector_set()[i].label;
    throw InputError(fmt::format("expected 16 projector entries, found {} (missing: {})", entries, missing));
  }
  if (!(rec.duration_s > 0.0)) throw InputError("duration_s must be positive");
  if (!(rec.power_mW > 0.0)) throw InputError("power_mW must be positive");
  return rec;
}

TomographyRecord load_record(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError(fmt::format("cannot open tomography record '{}'", file.string()));
  return parse_record(in);
}

void write_record(std::ostream& out, const TomographyRecord& record) {
  out << fmt::format("# duration_s = {}\n# power_mW = {}\n", record.duration_s, record.power_mW);
  for (const auto& [k, v] : record.metadata) out << fmt::format("# {} = {}\n", k, v);
  out << "label,count\n";
  const auto& set = projector_set();
  for (int i = 0; i < kSettings; ++i) out << fmt::format("{},{}\n", set[i].label, record.counts[i]);
}

nlohmann::json density_to_json(const Matrix4c& rho) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::json rr = nlohmann::json::array(), ii = nlohmann::json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(rho(r, c).real());
      ii.push_back(rho(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"basis", kTwoQubitBasis}, {"real", re}, {"imag", im}};
}

}  // namespace ppktp::tomography
