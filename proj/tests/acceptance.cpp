#include "bridgelab/contraction.hpp"
#include "bridgelab/gaussian.hpp"
#include "bridgelab/harness.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace bridgelab;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double gap(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

constexpr int kDiscreteInstances = 20;

/// Entropy ladder residual with Q the solved bridge, n ≤ 50, 20 instances of size 5×7.
Outcome ladder_identity() {
  auto t0 = Clock::now();
  double worst = 0.0;
  for (int s = 0; s < kDiscreteInstances; ++s) {
    DiscreteModel m = generate_discrete("bounded", 5, 7, 1000 + s);
    auto its = materialize_all(m, even_potentials(m, 50));
    LadderReport lr = entropy_ladder(m, its, solve_bridge(m).bridge);
    for (const auto& row : lr.rows) worst = std::max(worst, std::abs(row.residual));
  }
  double t = seconds_since(t0);
  return {worst <= 1e-9 && t < 5.0, fmt("worst residual %.3g, %.2f s", worst, t)};
}

/// (n+1)[H(η|π_{2n}) + H(μ|π_{2n+1})] ≤ H(P_{μ,η}|P) + 1e-8 for n ≤ 200.
Outcome linear_decay() {
  double worst = -1.0;
  for (int s = 0; s < kDiscreteInstances; ++s) {
    DiscreteModel m = generate_discrete("bounded", 5, 7, 1000 + s);
    auto its = materialize_all(m, even_potentials(m, 200));
    LadderReport lr = entropy_ladder(m, its, solve_bridge(m).bridge);
    for (const auto& row : lr.rows)
      worst = std::max(worst, (row.n + 1) * (row.h_eta_pi_even + row.h_mu_pi_odd) - lr.h_q_reference);
  }
  return {worst <= 1e-8, fmt("max excess over the reference entropy %.3g", worst)};
}

/// Consecutive Φ-entropy ratios ≤ (1 − ε_W)² = 0.5625 with osc(W) = log 2, until saturation at 1e-14.
Outcome bounded_geometric_rate() {
  double worst = 0.0;
  int ratios = 0;
  for (int s = 0; s < kDiscreteInstances; ++s) {
    DiscreteModel m = generate_discrete("bounded", 5, 7, 2000 + s);
    if (m.epsilon_w() != 0.25) return {false, "generated osc(W) differs from log 2"};
    auto its = materialize_all(m, even_potentials(m, 60));
    for (const PhiFunction& f : {phi::kl(), phi::tv(), phi::hellinger()}) {
      for (std::size_t n = 0; n + 1 < its.size(); ++n) {
        double a = phi_entropy(f, its[n].pi_even, m.eta), b = phi_entropy(f, its[n + 1].pi_even, m.eta);
        if (a < kSaturationFloor || b < kSaturationFloor) break;
        worst = std::max(worst, b / a);
        ++ratios;
      }
    }
  }
  return {worst <= 0.5625 + 1e-10 && ratios > 0, fmt("max ratio %.6f over %.0f ratios", worst, ratios)};
}

/// υ_{2n+2} = Ricc_ϖ(υ_{2n}) for 200 steps, d ∈ {1, 2, 3, 8}, plus the golden scalar fixed point.
Outcome riccati_equivalence() {
  double worst = 0.0;
  for (Index d : {1, 2, 3, 8}) {
    GaussianInstance g = generate_gaussian("gaussian-random-spd", d, 300 + d);
    auto traj = gaussian_trajectory(g.mu, g.eta, g.kernel, 400);
    RiccatiProblem p = make_riccati_problem(g.mu, g.eta, g.kernel);
    Matrix v = traj[0].upsilon;
    for (int n = 1; n <= 200; ++n) {
      v = riccati_apply(p, SymMatrix<double>(v));
      worst = std::max(worst, gap(v, traj[2 * n].upsilon));
    }
  }
  RiccatiProblem golden{SpdMatrix<double>(Matrix::Identity(1, 1)), Matrix::Identity(1, 1)};
  double r = riccati_fixed_point(golden)(0, 0);
  bool ok = worst <= 1e-10 && std::abs(r - 0.6180339887) <= 1e-9;
  return {ok, fmt("worst flow gap %.3g, golden r = %.10f", worst, r)};
}

/// Fitted slope of log||τ_{2n} − ς||₂ ≤ 0.95·(−2 log(1 + λ_min(r + ϖ))), 10 instances with d ≤ 3.
Outcome riccati_rate() {
  auto t0 = Clock::now();
  double worst = -std::numeric_limits<double>::infinity();
  bool all_fitted = true;
  for (int s = 0; s < 10; ++s) {
    GaussianInstance g = generate_gaussian("gaussian-random-spd", 1 + s % 3, 400 + s);
    auto traj = gaussian_trajectory(g.mu, g.eta, g.kernel, 300);
    GaussianBridge b = schrodinger_bridge_gaussian(g.mu, g.eta, g.kernel);
    double theory = -2.0 * std::log1p(min_eigenvalue(Matrix(b.r + b.problem.varpi.matrix())));
    std::vector<std::pair<int, double>> series;
    for (std::size_t k = 0; k < traj.size(); k += 2)
      series.push_back({static_cast<int>(k / 2), spectral_norm(Matrix(traj[k].tau.matrix() - b.varsigma))});
    RateFit fit = fit_rate(series);
    if (!fit.available) {
      all_fitted = false;
      continue;
    }
    worst = std::max(worst, fit.slope - 0.95 * theory);
  }
  double t = seconds_since(t0);
  return {all_fitted && worst <= 0.0 && t < 10.0,
          fmt("max (slope - 0.95 theory) %.4f, %.2f s", worst, t) + (all_fitted ? "" : ", a fit was unavailable")};
}

std::vector<GaussianInstance> gaussian_instances() {
  std::vector<GaussianInstance> out;
  for (int s = 0; s < 12; ++s) out.push_back(generate_gaussian("gaussian-random-spd", 1 + s % 4, 500 + s));
  out.push_back(generate_gaussian("gaussian-random-spd", 8, 520));
  // contractive cases with κ√(ρρ̄) < 1
  for (Index d : {1, 2}) {
    Matrix I = Matrix::Identity(d, d);
    out.push_back({Gaussian(Vector::Zero(d), I), Gaussian(Vector::Ones(d), 0.8 * I),
                   LinearGaussianKernel(Vector::Zero(d), 0.4 * I, I)});
  }
  return out;
}

/// μ pushed through the bridge equals η: mean and Frobenius covariance errors ≤ 1e-10.
Outcome bridge_transport() {
  double worst_mean = 0.0, worst_cov = 0.0;
  for (const auto& g : gaussian_instances()) {
    GaussianBridge b = schrodinger_bridge_gaussian(g.mu, g.eta, g.kernel);
    Gaussian img = push_forward(g.mu, b.kernel);
    worst_mean = std::max(worst_mean, (img.mean - g.eta.mean).norm());
    worst_cov = std::max(worst_cov, (img.cov() - g.eta.cov()).norm());
  }
  return {worst_mean <= 1e-10 && worst_cov <= 1e-10, fmt("mean %.3g, covariance %.3g", worst_mean, worst_cov)};
}

/// Closed-form H(𝒫_{2n}|P_{μ,η}) against the 2d-joint Gaussian KL, d ∈ {1, 2, 3}, n ≤ 20.
Outcome entropy_formula() {
  double worst = 0.0;
  for (Index d = 1; d <= 3; ++d) {
    GaussianInstance g = generate_gaussian("gaussian-random-spd", d, 600 + d);
    GaussianBridge b = schrodinger_bridge_gaussian(g.mu, g.eta, g.kernel);
    auto traj = gaussian_trajectory(g.mu, g.eta, g.kernel, 40);
    Vector bm;
    Matrix bs;
    oracle::joint_gaussian(g.mu.mean, g.mu.cov(), b.intercept, b.drift, b.varsigma, bm, bs);
    for (int n = 0; n <= 20; ++n) {
      LinearGaussianKernel k = traj[2 * n].kernel(g.mu, g.eta);
      Vector jm;
      Matrix js;
      oracle::joint_gaussian(g.mu.mean, g.mu.cov(), k.alpha, k.beta, k.cov(), jm, js);
      double want = oracle::gaussian_kl_cholesky(jm, js, bm, bs);
      worst = std::max(worst, std::abs(bridge_entropy(traj[2 * n], b, g.mu, g.eta, g.kernel) - want));
    }
  }
  return {worst <= 1e-9, fmt("worst gap %.3g", worst)};
}

/// H(P_{μ,η}|𝒫_{2n}) ≤ (1 + 1/ε)^{-n} H(P_{μ,η}|𝒫_0) for n ≤ 100 and the W2 checks.
Outcome envelope_domination() {
  int failures = 0, w2_decay_runs = 0;
  std::string failed;
  for (const auto& g : gaussian_instances()) {
    Report r = envelope_report(g.mu, g.eta, g.kernel, gaussian_trajectory(g.mu, g.eta, g.kernel, 200));
    for (const auto& v : r.verdicts) {
      if (v.check == "w2_decay") ++w2_decay_runs;
      if (!v.pass) {
        ++failures;
        failed = v.check;
      }
    }
  }
  std::string detail = fmt("%.0f failing verdicts, %.0f instances with a W2 decay check", failures, w2_decay_runs);
  if (failures) detail += ", last: " + failed;
  return {failures == 0 && w2_decay_runs > 0, detail};
}

/// Bounded 10×10 instance with g = e^{0.25U}, h = e^{0.25V}: ϱ < 1 and weighted-TV decay within 1e-10, n ≤ 20.
Outcome lyapunov_certificate() {
  ExperimentConfig c;
  c.regime = Regime::discrete;
  c.profile = "bounded";
  c.size = {10, 10};
  c.seed = 9;
  c.iterations = 20;
  c.lyapunov_delta = 0.25;
  c.checks = {"lyapunov"};
  ExperimentReport r = run_experiment(c);
  const Verdict* cert = r.report.find("lyapunov_certificate");
  const Verdict* decay = r.report.find("lyapunov_decay");
  if (!cert || !decay) return {false, "certificate not produced"};
  return {cert->pass && decay->pass, fmt("rho %.4f, worst decay excess %.3g", cert->worst, decay->worst)};
}

/// dobrushin, lip_norm and kantorovich_discrete against enumeration oracles up to 4×4, and 1000 data-processing tuples.
Outcome oracle_equivalence() {
  CounterRng rng(700);
  double worst = 0.0;
  int compared = 0;
  for (Index m = 1; m <= 4; ++m)
    for (Index n = 1; n <= 4; ++n)
      for (int trial = 0; trial < 5; ++trial) {
        Matrix k = oracle::random_kernel(rng, m, n);
        worst = std::max(worst, std::abs(dobrushin(k) - oracle::dobrushin_overlap(k)));
        Vector g = Vector::Constant(m, 0.1) + oracle::random_probability(rng, m) * 3.0;
        Vector h = Vector::Constant(n, 0.1) + oracle::random_probability(rng, n) * 3.0;
        if (m >= 2) worst = std::max(worst, std::abs(lip_norm(k, g, h) - oracle::lip_by_signs(k, g, h)));
        Matrix cost = oracle::random_matrix(rng, m, n).cwiseAbs();
        Vector a = oracle::random_probability(rng, m), b = oracle::random_probability(rng, n);
        double t = kantorovich_discrete(cost, DiscreteMeasure(a), DiscreteMeasure(b)).value;
        worst = std::max(worst, std::abs(t - oracle::transport_by_bases(cost, a, b)));
        ++compared;
      }
  int violations = 0;
  const auto cat = phi::catalog();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& f = cat[trial % cat.size()];
    Index n = 2 + trial % 5, m = 2 + (trial / 5) % 5;
    Matrix k = oracle::random_kernel(rng, n, m, 0.05);
    DiscreteMeasure a(oracle::random_probability(rng, n, 0.01)), b(oracle::random_probability(rng, n, 0.01));
    if (phi_entropy(f, a * k, b * k) > phi_entropy(f, a, b) + 1e-13) ++violations;
  }
  return {worst <= 1e-12 && violations == 0,
          fmt("worst oracle gap %.3g over %.0f instances", worst, compared) +
              fmt(", %.0f data-processing violations in 1000", violations)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Two runs of every shipped config write byte-identical report.csv and verdicts.json.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "bridgelab_acceptance";
  int configs = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(BRIDGELAB_CONFIG_DIR)) {
    ExperimentConfig c = config_from_json(read_json_file(entry.path().string()), BRIDGELAB_CONFIG_DIR);
    const fs::path a = root / "a" / entry.path().stem(), b = root / "b" / entry.path().stem();
    write_experiment(run_experiment(c), a.string(), false);
    write_experiment(run_experiment(c), b.string(), false);
    for (const char* file : {"report.csv", "verdicts.json"})
      if (slurp(a / file) != slurp(b / file)) ++differing;
    ++configs;
  }
  fs::remove_all(root);
  return {configs > 0 && differing == 0, fmt("%.0f configs, %.0f differing files", configs, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"entropy ladder identity", ladder_identity},
      {"linear entropy decay", linear_decay},
      {"bounded-cost geometric rate", bounded_geometric_rate},
      {"Riccati equivalence", riccati_equivalence},
      {"Riccati rate", riccati_rate},
      {"bridge transport", bridge_transport},
      {"entropy formula cross-check", entropy_formula},
      {"envelope domination", envelope_domination},
      {"Lyapunov certificate", lyapunov_certificate},
      {"oracle equivalence", oracle_equivalence},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    if (!o.pass) ++failed;
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
