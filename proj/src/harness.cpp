#include "bridgelab/harness.hpp"

#include "bridgelab/rng.hpp"
#include "bridgelab/svg.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bridgelab {

namespace {

const std::vector<std::string> kDiscreteChecks{"bridge_feasibility", "entropy_ladder", "identities",
                                               "geometric_rate",     "potentials",     "lyapunov"};
const std::vector<std::string> kGaussianChecks{"rates",          "riccati_fixed_point", "bridge_transport",
                                               "entropy_formula", "envelope",            "covariance_envelope",
                                               "hessian"};

const std::vector<std::string> kDiscretePlot{"h_eta_pi_even", "h_mu_pi_odd", "density_sup_gap", "potential_gap",
                                             "phi_kl_even"};
const std::vector<std::string> kGaussianPlot{"tau_gap", "mean_gap", "entropy_even", "envelope_basic", "w2_even"};

Matrix random_orthogonal(CounterRng rng, Index d) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Vector uniform_vector(CounterRng rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

Vector normal_vector(CounterRng rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Matrix spectral_sample(const CounterRng& rng, Index d, double lo, double hi) {
  Matrix q = random_orthogonal(rng.split(0), d);
  Vector ev = uniform_vector(rng.split(1), d, lo, hi);
  Matrix m = q * ev.asDiagonal() * q.transpose();
  return (m + m.transpose()) / 2.0;
}

double spec(const Matrix& m) { return spectral_norm(m); }

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_size(Regime regime, const std::vector<Index>& size) {
  if (regime == Regime::discrete) {
    if (size.size() != 2) throw DomainError("discrete size must be [nx, ny]");
    for (Index s : size)
      if (s < 1 || s > kMaxDiscreteSide) throw DomainError("discrete size outside [1, 64]");
  } else {
    if (size.size() != 1) throw DomainError("gaussian size must be [d]");
    if (size[0] < 1 || size[0] > kMaxGaussianDim) throw DomainError("gaussian dimension outside [1, 16]");
  }
}

std::vector<Index> parse_size(const Json& j) {
  if (j.is_number_integer()) return {j.get<Index>()};
  if (!j.is_array()) throw DomainError("size must be an integer or an array of integers");
  std::vector<Index> out;
  for (const auto& e : j) out.push_back(e.get<Index>());
  return out;
}

void run_discrete(const ExperimentConfig& cfg, const DiscreteModel& model, Report& out) {
  const auto& checks = cfg.checks;
  const int N = cfg.iterations;
  auto potentials = even_potentials(model, N);
  auto iterates = materialize_all(model, potentials);
  BridgeSolution bridge = solve_bridge(model);

  if (contains(checks, "bridge_feasibility")) {
    double mu_err = (bridge.bridge.rowwise().sum() - model.mu.weights()).cwiseAbs().maxCoeff();
    double eta_err = (bridge.bridge.colwise().sum().transpose() - model.eta.weights()).cwiseAbs().maxCoeff();
    out.add(0, "bridge_residual", bridge.residual);
    out.add(0, "bridge_iterations", bridge.iterations_used);
    out.add(0, "bridge_marginal_mu_error", mu_err);
    out.add(0, "bridge_marginal_eta_error", eta_err);
    double worst = std::max(mu_err, eta_err);
    out.verdict("bridge_feasibility", bridge.converged && worst <= 1e-10, worst,
                bridge.converged ? "" : "stopping rule reached the sweep cap");
  }
  if (contains(checks, "entropy_ladder")) out.append(entropy_ladder(model, iterates, bridge.bridge).report);
  if (contains(checks, "identities")) out.append(identity_suite(model, iterates));
  if (contains(checks, "geometric_rate")) out.append(geometric_rate_report(model, iterates));
  if (contains(checks, "potentials")) out.append(potential_report(model, potentials, iterates, bridge));
  if (contains(checks, "lyapunov")) {
    const double delta = cfg.lyapunov_delta;
    Vector g = (delta * model.U.array()).exp().matrix();
    Vector h = (delta * model.V.array()).exp().matrix();
    std::vector<KernelPair> pairs;
    for (int n = 1; n <= N; ++n) pairs.push_back({iterates[n].kernel_even, iterates[n].kernel_odd});
    SearchResult res = lyapunov_search(pairs, g, h);
    out.add(0, "lyapunov_a", res.best_a);
    out.add(0, "lyapunov_rho", res.best_rho);
    if (!res.found) {
      out.verdict("lyapunov_certificate", false, res.best_rho, "no grid point gives rho < 1");
      return;
    }
    const auto& cert = res.certificate;
    out.add(0, "lyapunov_drift_c", cert.c);
    bool verified = cert.verify(pairs);
    out.verdict("lyapunov_certificate", verified && cert.rho < 1.0, cert.rho);

    WeightPair w(g, h, cert.a);
    const Vector ga = w.g_a(), ha = w.h_a();
    const double r2 = cert.rho * cert.rho;
    double worst = -std::numeric_limits<double>::infinity();
    const double d0 = weighted_tv(iterates[0].pi_odd, model.mu, ga);
    for (int n = 0; n <= N; ++n) {
      double dn = weighted_tv(iterates[n].pi_odd, model.mu, ga);
      double env = std::pow(r2, n) * d0;
      out.add(n, "weighted_tv_odd", dn);
      out.add(n, "weighted_tv_odd_envelope", env);
      worst = std::max(worst, dn - env);
    }
    if (N >= 1) {
      const double e1 = weighted_tv(iterates[1].pi_even, model.eta, ha);
      for (int n = 1; n <= N; ++n) {
        double en = weighted_tv(iterates[n].pi_even, model.eta, ha);
        double env = std::pow(r2, n - 1) * e1;
        out.add(n, "weighted_tv_even", en);
        out.add(n, "weighted_tv_even_envelope", env);
        worst = std::max(worst, en - env);
      }
    }
    out.verdict("lyapunov_decay", worst <= 1e-10, worst);
  }
}

void run_gaussian(const ExperimentConfig& cfg, const GaussianInstance& inst, Report& out) {
  const auto& checks = cfg.checks;
  const int N = cfg.iterations;
  const Gaussian& mu = inst.mu;
  const Gaussian& eta = inst.eta;
  const LinearGaussianKernel& K = inst.kernel;
  const Index d = mu.dim();
  const Matrix I = Matrix::Identity(d, d);
  auto traj = gaussian_trajectory(mu, eta, K, 2 * N);
  GaussianBridge bridge = schrodinger_bridge_gaussian(mu, eta, K);

  if (contains(checks, "rates")) out.append(rate_report(traj, bridge, mu, eta, K));

  if (contains(checks, "riccati_fixed_point")) {
    for (bool odd : {false, true}) {
      RiccatiProblem p = odd ? make_riccati_problem(mu, eta, K, true) : bridge.problem;
      const Matrix& w = p.varpi.matrix();
      Matrix r = riccati_fixed_point(p);
      const double scale = 1.0 + spec(w);
      Matrix r_inv = spd_inverse(r);
      double worst = spec(Matrix(riccati_apply(p, r) - r)) / scale;
      worst = std::max(worst, spec(Matrix(r * r + w * r - w)) / (scale * scale));
      worst = std::max(worst, spec(Matrix(r_inv - I - spd_inverse(Matrix(w + r)))) / scale);
      worst = std::max(worst, spec(Matrix(I - r - r * spd_inverse(w) * r)) / scale);
      Matrix lower = spd_inverse(Matrix(I + spd_inverse(w)));
      double order = std::max(-min_eigenvalue(Matrix(I - r)), -min_eigenvalue(Matrix(r - lower)));
      const std::string tag = odd ? "odd" : "even";
      out.add(0, "riccati_r_min_eig_" + tag, min_eigenvalue(r));
      out.add(0, "riccati_r_max_eig_" + tag, max_eigenvalue(r));
      if (d == 1) out.add(0, "riccati_r_" + tag, r(0, 0));
      const std::string suffix = odd ? "_odd" : "";
      const std::string note = odd ? "extrapolated: odd chain mirrored from the even analysis" : "";
      out.verdict("riccati_fixed_point" + suffix, worst <= 1e-12, worst, note);
      out.verdict("riccati_fixed_point_bounds" + suffix, order <= 1e-12, order, note);
    }
  }

  if (contains(checks, "bridge_transport")) {
    Gaussian image = push_forward(mu, bridge.kernel);
    double mean_err = (image.mean - eta.mean).norm();
    double cov_err = (image.cov() - eta.cov()).norm();
    out.add(0, "bridge_mean_error", mean_err);
    out.add(0, "bridge_covariance_error", cov_err);
    out.verdict("bridge_transport", mean_err <= 1e-10 && cov_err <= 1e-10, std::max(mean_err, cov_err));
  }

  if (contains(checks, "entropy_formula")) {
    const Gaussian target = joint_law(mu, bridge.kernel);
    double worst = 0.0;
    for (const auto& st : traj) {
      if (st.step % 2 != 0) continue;
      const int n = st.step / 2;
      double formula = bridge_entropy(st, bridge, mu, eta, K);
      double oracle = gaussian_kl(joint_law(mu, st.kernel(mu, eta)), target);
      out.add(n, "bridge_entropy_formula", formula);
      out.add(n, "bridge_entropy_joint", oracle);
      worst = std::max(worst, std::abs(formula - oracle));
    }
    out.verdict("entropy_formula", worst <= 1e-9, worst);
  }

  if (contains(checks, "envelope")) out.append(envelope_report(mu, eta, K, traj));

  if (contains(checks, "covariance_envelope")) {
    const double tol = 1e-12 * (1.0 + spec(mu.cov()) + spec(eta.cov()) + spec(K.cov()));
    CovarianceEnvelope same = strongly_convex_covariance_envelope(mu.cov(), mu.cov(), eta.cov(), eta.cov(), K, 2 * N);
    double collapse = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Matrix& t = traj[k].tau.matrix();
      collapse = std::max({collapse, spec(Matrix(same.upper[k] - t)) / (1.0 + spec(t)),
                           spec(Matrix(same.lower[k] - t)) / (1.0 + spec(t))});
    }
    out.verdict("covariance_envelope_collapse", collapse <= 1e-10, collapse);

    CovarianceEnvelope env =
        strongly_convex_covariance_envelope(mu.cov(), mu.cov() / 2.0, eta.cov(), eta.cov() / 2.0, K, 2 * N);
    double order = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Matrix& t = traj[k].tau.matrix();
      double lo = -min_eigenvalue(Matrix(t - env.lower[k]));
      double up = -min_eigenvalue(Matrix(env.upper[k] - t));
      out.add(static_cast<int>(k), "covariance_envelope_width", spec(Matrix(env.upper[k] - env.lower[k])));
      order = std::max({order, lo, up});
    }
    out.verdict("covariance_envelope_order", order <= tol, order);
    out.verdict("covariance_envelope_riccati", env.rescaled_gap <= 1e-10, env.rescaled_gap);
  }

  if (contains(checks, "hessian")) {
    double gap = 0.0;
    bool bounds = true;
    for (const auto& st : traj) {
      if (st.step % 2 != 0 || st.step + 2 > 2 * N) continue;
      PotentialHessian hs = potential_hessian(st, mu, eta, K);
      out.add(st.step / 2, "hessian_decomposition_gap", hs.decomposition_gap);
      gap = std::max(gap, hs.decomposition_gap);
      bounds = bounds && hs.curvature_bounds;
    }
    out.verdict("hessian_decomposition", gap <= 1e-10, gap);
    out.verdict("hessian_curvature", bounds, bounds ? 0.0 : 1.0);
  }
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::string regime_name(Regime r) { return r == Regime::discrete ? "discrete" : "gaussian"; }

Regime parse_regime(const std::string& s) {
  if (s == "discrete") return Regime::discrete;
  if (s == "gaussian") return Regime::gaussian;
  throw DomainError("unknown regime '" + s + "'");
}

DiscreteModel generate_discrete(const std::string& profile, Index nx, Index ny, std::uint64_t seed,
                                const GenerateOptions& options) {
  check_size(Regime::discrete, {nx, ny});
  CounterRng root(seed);
  Matrix W(nx, ny);
  if (profile == "bounded") {
    if (!(options.osc_cap >= 0.0) || !std::isfinite(options.osc_cap)) throw DomainError("osc_cap must be finite and >= 0");
    CounterRng rng = root.split(1);
    for (Index i = 0; i < nx; ++i)
      for (Index j = 0; j < ny; ++j) W(i, j) = rng.uniform(0.0, options.osc_cap);
    W(0, 0) = 0.0;
    if (nx * ny > 1) W(nx - 1, ny - 1) = options.osc_cap;
  } else if (profile == "quadratic-grid") {
    if (!(options.temperature > 0.0)) throw DomainError("temperature must be positive");
    for (Index i = 0; i < nx; ++i)
      for (Index j = 0; j < ny; ++j) {
        double x = nx > 1 ? static_cast<double>(i) / static_cast<double>(nx - 1) : 0.0;
        double y = ny > 1 ? static_cast<double>(j) / static_cast<double>(ny - 1) : 0.0;
        W(i, j) = (x - y) * (x - y) / (2.0 * options.temperature);
      }
  } else {
    throw DomainError("unknown discrete profile '" + profile + "'");
  }
  Vector U = uniform_vector(root.split(2), nx, -1.0, 1.0);
  Vector V = uniform_vector(root.split(3), ny, -1.0, 1.0);
  return build_model(W, Vector::Ones(nx), Vector::Ones(ny), U, V);
}

GaussianInstance generate_gaussian(const std::string& profile, Index d, std::uint64_t seed) {
  if (profile != "gaussian-random-spd") throw DomainError("unknown gaussian profile '" + profile + "'");
  check_size(Regime::gaussian, {d});
  CounterRng root(seed);
  Matrix sigma = spectral_sample(root.split(1), d, 0.5, 2.0);
  Matrix sigma_bar = spectral_sample(root.split(2), d, 0.5, 2.0);
  Matrix tau = spectral_sample(root.split(3), d, 0.1, 1.0);
  Matrix q1 = random_orthogonal(root.split(4), d), q2 = random_orthogonal(root.split(5), d);
  Vector sv = uniform_vector(root.split(6), d, 0.5, 1.5);
  Matrix beta = q1 * sv.asDiagonal() * q2.transpose();
  GaussianInstance inst;
  inst.mu = Gaussian(normal_vector(root.split(7), d), sigma);
  inst.eta = Gaussian(normal_vector(root.split(8), d), sigma_bar);
  inst.kernel = LinearGaussianKernel(normal_vector(root.split(9), d), beta, tau);
  return inst;
}

Json generate_instance(Regime regime, const std::vector<Index>& size, std::uint64_t seed, const std::string& profile,
                       const GenerateOptions& options) {
  check_size(regime, size);
  if (regime == Regime::discrete) return discrete_model_to_json(generate_discrete(profile, size[0], size[1], seed, options));
  return gaussian_instance_to_json(generate_gaussian(profile, size[0], seed));
}

std::vector<std::string> known_checks(Regime regime) {
  return regime == Regime::discrete ? kDiscreteChecks : kGaussianChecks;
}

ExperimentConfig config_from_json(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  static const std::vector<std::string> keys{"regime", "profile", "size",   "instance",       "iterations", "seed",
                                             "checks", "output",  "osc_cap", "temperature", "lyapunov_delta", "plot"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!contains(keys, it.key())) throw DomainError("unknown config key '" + it.key() + "'");
  ExperimentConfig c;
  try {
    if (j.contains("profile")) c.profile = j["profile"].get<std::string>();
    if (j.contains("regime")) {
      c.regime = parse_regime(j["regime"].get<std::string>());
    } else {
      c.regime = c.profile == "gaussian-random-spd" ? Regime::gaussian : Regime::discrete;
    }
    if (c.regime == Regime::gaussian && !j.contains("profile")) c.profile = "gaussian-random-spd";
    c.size = c.regime == Regime::discrete ? std::vector<Index>{5, 7} : std::vector<Index>{2};
    if (j.contains("size")) c.size = parse_size(j["size"]);
    if (j.contains("iterations")) c.iterations = j["iterations"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("osc_cap")) c.options.osc_cap = j["osc_cap"].get<double>();
    if (j.contains("temperature")) c.options.temperature = j["temperature"].get<double>();
    if (j.contains("lyapunov_delta")) c.lyapunov_delta = j["lyapunov_delta"].get<double>();
    if (j.contains("plot")) {
      const Json& p = j["plot"];
      if (p.is_boolean()) {
        c.plot = p.get<bool>();
      } else {
        std::string s = p.get<std::string>();
        if (s != "on" && s != "off") throw DomainError("plot must be on or off");
        c.plot = s == "on";
      }
    }
    if (j.contains("checks")) c.checks = j["checks"].get<std::vector<std::string>>();
    if (j.contains("instance") && !j["instance"].is_null()) {
      const Json& inst = j["instance"];
      if (inst.is_string()) {
        std::filesystem::path p(inst.get<std::string>());
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        c.instance = read_json_file(p.string());
      } else {
        c.instance = inst;
      }
    }
  } catch (const Json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (c.iterations < 1) throw DomainError("iterations must be >= 1");
  const auto known = known_checks(c.regime);
  if (c.checks.empty()) c.checks = known;
  for (const auto& ch : c.checks)
    if (!contains(known, ch)) throw DomainError("unknown check '" + ch + "' for regime " + regime_name(c.regime));
  const std::vector<std::string> profiles = c.regime == Regime::discrete
                                                ? std::vector<std::string>{"bounded", "quadratic-grid"}
                                                : std::vector<std::string>{"gaussian-random-spd"};
  if (!contains(profiles, c.profile))
    throw DomainError("unknown profile '" + c.profile + "' for regime " + regime_name(c.regime));
  if (c.instance.is_null()) {
    check_size(c.regime, c.size);
  } else if (c.regime == Regime::discrete) {
    discrete_model_from_json(c.instance);
  } else {
    gaussian_instance_from_json(c.instance);
  }
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j{{"regime", regime_name(c.regime)},
         {"profile", c.profile},
         {"size", c.size},
         {"iterations", c.iterations},
         {"seed", c.seed},
         {"checks", c.checks},
         {"output", c.output},
         {"osc_cap", c.options.osc_cap},
         {"temperature", c.options.temperature},
         {"lyapunov_delta", c.lyapunov_delta},
         {"plot", c.plot ? "on" : "off"}};
  j["instance"] = c.instance;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  j.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return "fnv1a64:" + hex64(h);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport out;
  out.config_hash = config_hash(config);
  out.seed = config.seed;
  out.regime = config.regime;
  if (config.regime == Regime::discrete) {
    DiscreteModel model = config.instance.is_null()
                              ? generate_discrete(config.profile, config.size[0], config.size[1], config.seed,
                                                  config.options)
                              : discrete_model_from_json(config.instance);
    run_discrete(config, model, out.report);
  } else {
    GaussianInstance inst = config.instance.is_null() ? generate_gaussian(config.profile, config.size[0], config.seed)
                                                      : gaussian_instance_from_json(config.instance);
    run_gaussian(config, inst, out.report);
  }
  for (const auto& v : out.report.verdicts) out.report.add(0, "verdict:" + v.check, v.worst);
  return out;
}

Json verdicts_json(const ExperimentReport& r) {
  Json list = Json::array();
  for (const auto& v : r.report.verdicts) {
    Json worst = std::isfinite(v.worst) ? Json(v.worst) : Json(format_double(v.worst));
    Json e{{"check", v.check}, {"pass", v.pass}, {"worst_residual", worst}};
    if (!v.note.empty()) e["note"] = v.note;
    list.push_back(e);
  }
  return Json{{"provenance", {{"config_hash", r.config_hash}, {"seed", r.seed}, {"regime", regime_name(r.regime)}}},
              {"all_pass", r.all_pass()},
              {"verdicts", list}};
}

void write_experiment(const ExperimentReport& report, const std::string& dir, bool plot) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_text_file((base / "report.csv").string(), report_csv(report.report));
  write_text_file((base / "verdicts.json").string(), verdicts_json(report).dump(2) + "\n");
  if (plot) {
    const auto& metrics = report.regime == Regime::discrete ? kDiscretePlot : kGaussianPlot;
    write_text_file((base / "plot.svg").string(),
                    render_log_plot(report.report, metrics, regime_name(report.regime) + " convergence"));
  }
}

}  // namespace bridgelab
