#include "cli.hpp"

#include "intcens/asymptotics.hpp"
#include "intcens/characterization.hpp"
#include "intcens/data.hpp"
#include "intcens/estimators.hpp"
#include "intcens/simulation.hpp"
#include "intcens/smooth_functionals.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace intcens::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> g;
  for (const auto& item : split(s)) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error("malformed grid value '" + item + "'");
    g.push_back(x);
  }
  return g;
}

std::vector<Estimator> parse_estimators(const std::string& s) {
  std::vector<Estimator> out;
  for (const auto& item : split(s)) out.push_back(parse_estimator(item));
  if (out.empty()) throw Error("no estimators given");
  return out;
}

// Writes to `path` when given, else to the fallback stream.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write(f);
  if (!f) throw Error("error writing " + path);
}

// Flat key=value lines become --key=value arguments placed ahead of the
// command line, so explicit flags (parsed later) win.
std::vector<std::string> config_args(const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key == "config" || key == "help" || sub.get_option_no_throw("--" + key) == nullptr)
      throw Error(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

struct EstimateArgs {
  std::string input;
  std::string estimator = "ls-full";
  double tol = 1e-8;
  int max_iter = 500;
  bool no_line_search = false;
  std::optional<double> upper;
  std::string out;
};

struct VerifyArgs {
  std::string input;
  std::string fit;
  std::string which = "full";
  double tol = 1e-8;
  std::string out;
};

struct ChernoffArgs {
  std::int64_t paths = 100000;
  double horizon = 2.5;
  double step = 1e-3;
  std::uint64_t seed = 1;
  std::string cache = default_chernoff_cache();
  bool no_cache = false;

  ChernoffOptions options(int threads) const {
    ChernoffOptions o;
    o.paths = paths;
    o.horizon = horizon;
    o.step = step;
    o.seed = seed;
    o.threads = threads;
    o.cache_path = no_cache ? std::string() : cache;
    return o;
  }
};

void add_chernoff_options(CLI::App* sub, ChernoffArgs& c, const std::string& prefix) {
  sub->add_option("--" + prefix + "paths", c.paths, "Brownian paths for Var(Z)")->capture_default_str();
  sub->add_option("--" + prefix + "horizon", c.horizon, "Half-width T of the argmin window")->capture_default_str();
  sub->add_option("--" + prefix + "step", c.step, "Time step of the discretized paths")->capture_default_str();
  sub->add_option("--" + prefix + "seed", c.seed, "Master seed for the paths")->capture_default_str();
  sub->add_option("--cache", c.cache, "Cache file for Var(Z) results (default under the user cache directory)");
  sub->add_flag("--no-cache", c.no_cache, "Neither read nor write the Var(Z) cache");
}

struct AsymptoticsArgs {
  std::string model = "uniform-[0,2]";
  std::string grid;
  std::string variant = "full";
  std::optional<double> var_z;
  int threads = 0;
  ChernoffArgs chernoff;
  std::string out;
};

struct StudyArgs {
  std::string model = "trunc-exp-[0,2]";
  Index n = 1000;
  int reps = 1000;
  std::string grid;
  std::string estimators = "mle,ls-full,ls-simple";
  std::uint64_t seed = 1;
  int threads = 0;
  double tol = 1e-8;
  int max_iter = 500;
  bool theory = false;
  ChernoffArgs chernoff;
  std::string out;
  std::string plot_data;
  int per_interval = 10;
};

struct FunctionalArgs {
  std::string model = "triangle-[0,1]";
  Index n = 1000;
  int reps = 2000;
  std::string estimators = "mle,ls-full,ls-simple";
  std::uint64_t seed = 1;
  int threads = 0;
  double tol = 1e-8;
  int max_iter = 500;
  std::string out;
  std::string raw;
};

void log_config(std::ostream& err, const CLI::App& sub) {
  err << "# " << sub.get_name() << " resolved config\n" << sub.config_to_str(true, false);
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.estimator == "current-status") {
    std::ifstream in(a.input);
    if (!in) throw Error("cannot open " + a.input);
    const StepDistribution F = fit_current_status(parse_current_status_csv(in));
    emit(a.out, out, [&](std::ostream& o) { write_step_csv(F, o); });
    return kOk;
  }
  const Estimator e = parse_estimator(a.estimator);
  const Sample2 sample = ingest_csv(a.input, a.upper);
  IcmOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.line_search = !a.no_line_search;
  const FitResult r = fit(e, sample, opts);
  emit(a.out, out, [&](std::ostream& o) { write_step_csv(r.F, o); });
  err << "# iterations " << r.iterations << (r.converged ? " converged" : " NOT converged") << '\n'
      << "# fenchel " << r.fenchel.to_json() << '\n';
  return r.converged ? kOk : kNotConverged;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
  const Sample2 sample = ingest_csv(a.input);
  std::ifstream in(a.fit);
  if (!in) throw Error("cannot open " + a.fit);
  const StepDistribution F = read_step_csv(in);
  FenchelReport r;
  if (a.which == "full")
    r = verify_fenchel(F, sample, a.tol);
  else if (a.which == "simple")
    r = verify_fenchel_simple(F, sample, a.tol);
  else if (a.which == "mle")
    r = verify_fenchel_mle(F, sample, a.tol);
  else
    throw Error("--which must be full, simple or mle");
  emit(a.out, out, [&](std::ostream& o) { o << r.to_json() << '\n'; });
  return r.pass ? kOk : kNotConverged;
}

int cmd_asymptotics(const AsymptoticsArgs& a, std::ostream& out, std::ostream& err) {
  const ModelSpec m = model_preset(a.model);
  const std::vector<double> grid = a.grid.empty() ? default_grid(m) : parse_grid(a.grid);
  const Variant v = parse_variant(a.variant);
  double var_z = 0.0;
  if (a.var_z) {
    var_z = *a.var_z;
  } else {
    const ChernoffEstimate e = chernoff_variance(a.chernoff.options(a.threads));
    var_z = e.variance;
    err << "# Var(Z) = " << format_double(e.variance) << " +- " << format_double(e.variance_stderr)
        << (e.from_cache ? " (cached)" : "") << '\n';
  }
  const auto curve = theoretical_variance_curve(m, grid, v, var_z);
  emit(a.out, out, [&](std::ostream& o) { write_curve_csv(o, curve); });
  return kOk;
}

int cmd_chernoff(const ChernoffArgs& a, int threads, const std::string& path, std::ostream& out,
                 std::ostream& err) {
  const ChernoffEstimate e = chernoff_variance(a.options(threads));
  if (e.from_cache) err << "# read from cache " << a.cache << '\n';
  emit(path, out, [&](std::ostream& o) {
    o << "T,dt,paths,seed,mean,mean_se,var,var_se\n"
      << format_double(a.horizon) << ',' << format_double(a.step) << ',' << a.paths << ',' << a.seed << ','
      << format_double(e.mean) << ',' << format_double(e.mean_stderr) << ',' << format_double(e.variance) << ','
      << format_double(e.variance_stderr) << '\n';
  });
  return kOk;
}

int cmd_study(const StudyArgs& a, std::ostream& out, std::ostream& err) {
  StudyConfig cfg;
  cfg.model = a.model;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.grid = parse_grid(a.grid);
  cfg.estimators = parse_estimators(a.estimators);
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.icm.tol = a.tol;
  cfg.icm.max_iter = a.max_iter;
  cfg.theory = a.theory;
  cfg.chernoff = a.chernoff.options(a.threads);
  const StudyTable t = variance_grid_study(cfg);
  for (const auto& [e, k] : t.excluded) err << "# " << to_string(e) << ": " << k << " replications excluded\n";
  emit(a.out, out, [&](std::ostream& o) { t.write_csv(o); });
  if (!a.plot_data.empty()) emit(a.plot_data, out, [&](std::ostream& o) { t.write_plot_data(o, a.per_interval); });
  return kOk;
}

int cmd_functional(const FunctionalArgs& a, std::ostream& out, std::ostream& err) {
  FunctionalConfig cfg;
  cfg.model = a.model;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.estimators = parse_estimators(a.estimators);
  cfg.threads = a.threads;
  cfg.icm.tol = a.tol;
  cfg.icm.max_iter = a.max_iter;
  const FunctionalStudy s = functional_variance_study(cfg);
  for (const auto& r : s.rows) err << "# " << to_string(r.estimator) << ": " << r.excluded << " replications excluded\n";
  emit(a.out, out, [&](std::ostream& o) { s.write_csv(o); });
  if (!a.raw.empty()) emit(a.raw, out, [&](std::ostream& o) { s.write_raw(o); });
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric estimation of a distribution function from interval-censored data", "intcens"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string config_file;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "Flat key = value file; explicit flags override it");
  };
  auto add_out = [](CLI::App* sub, std::string& target) {
    sub->add_option("--out", target, "Write data here instead of standard output");
  };
  auto add_threads = [](CLI::App* sub, int& target) {
    sub->add_option("--threads", target, "Worker threads; 0 uses every available core")->capture_default_str();
  };

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Fit an estimator to a data file and write its step function");
  estimate->add_option("--input", est.input, "CSV with u,v,d0,d1 or u,v,x rows (t,delta for current-status)")
      ->required();
  estimate->add_option("--estimator", est.estimator, "Estimator to fit")
      ->check(CLI::IsMember({"mle", "ls-full", "ls-simple", "current-status"}))
      ->capture_default_str();
  estimate->add_option("--tol", est.tol, "Certificate and iterate tolerance")->capture_default_str();
  estimate->add_option("--max-iter", est.max_iter, "Iteration cap")->capture_default_str();
  estimate->add_flag("--no-line-search", est.no_line_search, "Take full convex minorant steps");
  estimate->add_option("--upper", est.upper, "Support endpoint M (default: largest v)");
  add_out(estimate, est.out);
  add_config(estimate);

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check the optimality certificate of a fitted step function");
  verify->add_option("--input", ver.input, "Data CSV the fit belongs to")->required();
  verify->add_option("--fit", ver.fit, "Step function CSV with columns t,F")->required();
  verify->add_option("--which", ver.which, "Criterion to certify")
      ->check(CLI::IsMember({"full", "simple", "mle"}))
      ->capture_default_str();
  verify->add_option("--tol", ver.tol, "Tolerance of the certificate")->capture_default_str();
  add_out(verify, ver.out);
  add_config(verify);

  AsymptoticsArgs asy;
  auto* asymptotics = app.add_subcommand("asymptotics", "Limit scale sigma(t) and variance curve sigma(t)^2 Var(Z)");
  asymptotics->add_option("--model", asy.model, "Model preset")
      ->check(CLI::IsMember(model_preset_names()))
      ->capture_default_str();
  asymptotics->add_option("--grid", asy.grid, "Comma-separated times (default: 19 equally spaced points)");
  asymptotics->add_option("--variant", asy.variant, "Three-term (full) or two-term (simple) least squares")
      ->check(CLI::IsMember({"full", "simple"}))
      ->capture_default_str();
  asymptotics->add_option("--var-z", asy.var_z, "Use this Var(Z) instead of simulating it");
  add_chernoff_options(asymptotics, asy.chernoff, "");
  add_threads(asymptotics, asy.threads);
  add_out(asymptotics, asy.out);
  add_config(asymptotics);

  ChernoffArgs che;
  int che_threads = 0;
  std::string che_out;
  auto* chernoff = app.add_subcommand("chernoff", "Monte Carlo mean and variance of argmin {W(t) + t^2}");
  add_chernoff_options(chernoff, che, "");
  add_threads(chernoff, che_threads);
  add_out(chernoff, che_out);
  add_config(chernoff);

  StudyArgs stu;
  auto* study = app.add_subcommand("study", "Simulated n^(2/3) var F_n(t) on a grid of times");
  study->add_option("--model", stu.model, "Model preset")
      ->check(CLI::IsMember(model_preset_names()))
      ->capture_default_str();
  study->add_option("--n", stu.n, "Sample size")->capture_default_str();
  study->add_option("--reps", stu.reps, "Replications")->capture_default_str();
  study->add_option("--grid", stu.grid, "Comma-separated times (default: 19 equally spaced points)");
  study->add_option("--estimators", stu.estimators, "Comma-separated subset of mle, ls-full, ls-simple")
      ->capture_default_str();
  study->add_option("--seed", stu.seed, "Master seed")->capture_default_str();
  add_threads(study, stu.threads);
  study->add_option("--tol", stu.tol, "Estimator tolerance")->capture_default_str();
  study->add_option("--max-iter", stu.max_iter, "Estimator iteration cap")->capture_default_str();
  study->add_flag("--theory", stu.theory, "Add the limit variance column");
  add_chernoff_options(study, stu.chernoff, "chernoff-");
  add_out(study, stu.out);
  study->add_option("--plot-data", stu.plot_data, "Also write interpolated long-format plot data here");
  study->add_option("--per-interval", stu.per_interval, "Interpolated points per grid interval")
      ->capture_default_str();
  add_config(study);

  FunctionalArgs fun;
  auto* functional = app.add_subcommand("functional", "Simulated n var of the plug-in mean per estimator");
  functional->add_option("--model", fun.model, "Model preset")
      ->check(CLI::IsMember(model_preset_names()))
      ->capture_default_str();
  functional->add_option("--n", fun.n, "Sample size")->capture_default_str();
  functional->add_option("--reps", fun.reps, "Replications (at least 100)")->capture_default_str();
  functional->add_option("--estimators", fun.estimators, "Comma-separated subset of mle, ls-full, ls-simple")
      ->capture_default_str();
  functional->add_option("--seed", fun.seed, "Master seed")->capture_default_str();
  add_threads(functional, fun.threads);
  functional->add_option("--tol", fun.tol, "Estimator tolerance")->capture_default_str();
  functional->add_option("--max-iter", fun.max_iter, "Estimator iteration cap")->capture_default_str();
  add_out(functional, fun.out);
  functional->add_option("--raw", fun.raw, "Also write every plug-in estimate here");
  add_config(functional);

  std::vector<std::string> argv = args;
  try {
    if (!argv.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(argv[0])) {
        for (std::size_t i = 1; i < argv.size(); ++i) {
          std::string path;
          if (argv[i] == "--config" && i + 1 < argv.size()) path = argv[i + 1];
          if (argv[i].rfind("--config=", 0) == 0) path = argv[i].substr(9);
          if (path.empty()) continue;
          const auto extra = config_args(path, *sub);
          argv.insert(argv.begin() + 1, extra.begin(), extra.end());
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    log_config(err, *sub);
    if (sub == estimate) return cmd_estimate(est, out, err);
    if (sub == verify) return cmd_verify(ver, out, err);
    if (sub == asymptotics) return cmd_asymptotics(asy, out, err);
    if (sub == chernoff) return cmd_chernoff(che, che_threads, che_out, out, err);
    if (sub == study) return cmd_study(stu, out, err);
    if (sub == functional) return cmd_functional(fun, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace intcens::cli
