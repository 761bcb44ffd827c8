#include "cli.hpp"

#include "bridgelab/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace bridgelab::cli {

namespace {

const std::vector<std::string> kVerifyDiscrete{"bridge_feasibility", "entropy_ladder", "identities", "potentials"};
const std::vector<std::string> kVerifyGaussian{"riccati_fixed_point", "bridge_transport", "entropy_formula",
                                               "covariance_envelope", "hessian"};
const std::vector<std::string> kRatesDiscrete{"geometric_rate", "potentials", "lyapunov"};
const std::vector<std::string> kRatesGaussian{"rates", "envelope"};

struct RunOptions {
  std::vector<std::string> configs;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::string out;
  int jobs = 1;
  std::string plot;
  int verbosity = 0;
};

struct GenOptions {
  std::string profile;
  std::string size;
  std::uint64_t seed = 0;
  std::string out;
  double osc_cap = GenerateOptions{}.osc_cap;
  double temperature = GenerateOptions{}.temperature;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception&) {
    return Json(text);
  }
}

std::vector<Index> parse_size_text(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      long long v = std::stoll(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw UsageError("invalid --size '" + text + "' (expected N or NxM)");
    }
  }
  if (out.empty()) throw UsageError("invalid --size '" + text + "'");
  return out;
}

std::string default_output() {
  const char* env = std::getenv("BRIDGELAB_OUT");
  return env && *env ? env : "bridgelab-out";
}

struct Job {
  ExperimentConfig config;
  std::string dir;
};

/// Loads a config, applies overrides and the command's check selection.
Job prepare(const std::string& path, const RunOptions& opt, const std::string& command, bool many) {
  Json j = read_json_file(path);
  if (!j.is_object()) throw DomainError(path + ": config must be a JSON object");
  static const std::vector<std::string> keys{"regime", "profile", "size",   "instance",       "iterations", "seed",
                                             "checks", "output",  "osc_cap", "temperature", "lyapunov_delta", "plot"};
  for (const auto& kv : opt.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override '" + kv + "' is not key=value");
    std::string key = kv.substr(0, eq);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError("override of unknown key '" + key + "'");
    j[key] = parse_value(kv.substr(eq + 1));
  }
  if (opt.seed) j["seed"] = *opt.seed;
  if (opt.iterations) j["iterations"] = *opt.iterations;
  if (!opt.plot.empty()) j["plot"] = opt.plot;

  const std::filesystem::path p(path);
  ExperimentConfig cfg = config_from_json(j, p.parent_path().string());
  if (command == "discrete-run" && cfg.regime != Regime::discrete)
    throw DomainError(path + ": discrete-run needs a discrete config");
  if (command == "gaussian-run" && cfg.regime != Regime::gaussian)
    throw DomainError(path + ": gaussian-run needs a gaussian config");
  if (command == "verify") cfg.checks = cfg.regime == Regime::discrete ? kVerifyDiscrete : kVerifyGaussian;
  if (command == "rates") cfg.checks = cfg.regime == Regime::discrete ? kRatesDiscrete : kRatesGaussian;

  std::string dir;
  if (!opt.out.empty()) {
    dir = many ? (std::filesystem::path(opt.out) / p.stem()).string() : opt.out;
  } else if (!cfg.output.empty()) {
    dir = cfg.output;
  } else {
    dir = many ? (std::filesystem::path(default_output()) / p.stem()).string() : default_output();
  }
  cfg.output = dir;
  return {std::move(cfg), dir};
}

struct Outcome {
  int code = 0;
  std::string text;
  std::string error;
};

Outcome execute(const Job& job, int verbosity) {
  Outcome o;
  try {
    ExperimentReport rep = run_experiment(job.config);
    write_experiment(rep, job.dir, job.config.plot);
    std::size_t passed = 0;
    std::ostringstream os;
    for (const auto& v : rep.report.verdicts) {
      if (v.pass) ++passed;
      if (!v.pass || verbosity > 0)
        os << "  " << (v.pass ? "PASS " : "FAIL ") << v.check << " worst=" << format_double(v.worst)
           << (v.note.empty() ? "" : " (" + v.note + ")") << "\n";
    }
    o.text = job.dir + ": " + std::to_string(passed) + "/" + std::to_string(rep.report.verdicts.size()) +
             " verdicts pass\n" + os.str();
    o.code = rep.all_pass() ? 0 : 1;
  } catch (const DomainError& e) {
    o.code = 2;
    o.error = job.dir + ": " + e.what() + "\n";
  } catch (const std::exception& e) {
    o.code = 1;
    o.error = job.dir + ": " + e.what() + "\n";
  }
  return o;
}

int run_command(const std::string& command, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.jobs < 1) throw UsageError("--jobs must be >= 1");
  std::vector<Job> jobs;
  for (const auto& path : opt.configs) jobs.push_back(prepare(path, opt, command, opt.configs.size() > 1));

  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) outcomes[i] = execute(jobs[i], opt.verbosity);
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(opt.jobs), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& o : outcomes) {
    out << o.text;
    err << o.error;
    code = std::max(code, o.code);
  }
  return code;
}

int run_gen(const GenOptions& g, std::ostream& out) {
  Regime regime = g.profile == "gaussian-random-spd" ? Regime::gaussian : Regime::discrete;
  std::vector<Index> size = parse_size_text(g.size);
  if (regime == Regime::discrete && size.size() == 1) size.push_back(size[0]);
  Json inst = generate_instance(regime, size, g.seed, g.profile, GenerateOptions{g.osc_cap, g.temperature});
  const std::filesystem::path p(g.out);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  write_text_file(g.out, inst.dump(2) + "\n");
  out << "wrote " << g.out << "\n";
  return 0;
}

void add_run_options(CLI::App* sub, RunOptions& opt) {
  sub->add_option("--config", opt.configs, "Experiment config (JSON); repeat for several")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", opt.seed, "Override the config seed");
  sub->add_option("--iterations", opt.iterations, "Override the number of Sinkhorn sweeps")->check(CLI::PositiveNumber);
  sub->add_option("--out", opt.out, "Output directory (default $BRIDGELAB_OUT or ./bridgelab-out)");
  sub->add_option("--jobs", opt.jobs, "Worker threads for independent configs")->check(CLI::PositiveNumber);
  sub->add_option("--plot", opt.plot, "Write plot.svg")->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--set", opt.overrides, "Config override key=value");
  sub->add_option("overrides", opt.overrides, "Config overrides key=value");
  sub->add_flag("-v,--verbose", opt.verbosity, "List every verdict");
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sinkhorn and Schroedinger bridge experiments", "bridgelab"};
  app.require_subcommand(1);
  std::map<std::string, RunOptions> run;
  GenOptions gen;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"discrete-run", "Run a discrete experiment"},
      {"gaussian-run", "Run a Gaussian experiment"},
      {"verify", "Run the identity checks of a config"},
      {"rates", "Compare empirical rates against the theoretical bounds"}};
  for (const auto& [name, help] : runs) add_run_options(app.add_subcommand(name, help), run[name]);
  CLI::App* g = app.add_subcommand("gen", "Write a generated instance to a file");
  g->add_option("--profile", gen.profile, "bounded, quadratic-grid or gaussian-random-spd")->required();
  g->add_option("--size", gen.size, "NxM for discrete profiles, d for Gaussian")->required();
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Instance file")->required();
  g->add_option("--osc-cap", gen.osc_cap, "Upper end of the bounded cost");
  g->add_option("--temperature", gen.temperature, "Regularization t of the quadratic cost");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "gen") return run_gen(gen, out);
    return run_command(sub->get_name(), run.at(sub->get_name()), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bridgelab::cli
