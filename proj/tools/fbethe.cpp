#include "fbethe/exact.hpp"
#include "fbethe/harness.hpp"
#include "fbethe/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace fbethe;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalidModel = 2, kNumeric = 3 };

struct Args {
  std::string model_file;
  std::string gen;
  double alpha = 1.0;
  std::string alpha_grid;
  std::string t_grid;
  std::string r_grid;
  std::string init_t_grid;
  std::string out;
  std::string schedule = "synchronous";
  double damping = 0.0;
  std::optional<double> tol;
  std::optional<int> max_iter;
  bool trace = false;
  std::string init = "unit";
  std::string direction = "umax";
  std::uint64_t seed = 1;
};

GaussianModel load(const Args& a, const char* fallback_gen = nullptr) {
  if (!a.model_file.empty()) return load_model(a.model_file);
  if (!a.gen.empty()) return generate_model(GeneratorSpec::parse(a.gen));
  if (fallback_gen) return generate_model(GeneratorSpec::parse(fallback_gen));
  throw UsageError("need --model FILE or --gen SPEC");
}

std::string source_of(const Args& a, const char* fallback_gen) {
  if (!a.gen.empty()) return a.gen;
  return a.model_file.empty() && fallback_gen ? fallback_gen : "";
}

NewtonOptions newton_opts(const Args& a) {
  NewtonOptions o;
  if (a.tol) o.tolerance = *a.tol;
  if (a.max_iter) o.max_iterations = *a.max_iter;
  o.trace = a.trace;
  o.check();
  return o;
}

MPOptions mp_opts(const Args& a) {
  MPOptions o;
  if (a.schedule == "synchronous") o.schedule = Schedule::Synchronous;
  else if (a.schedule == "round-robin") o.schedule = Schedule::RoundRobin;
  else throw UsageError("unknown schedule \"" + a.schedule + "\" (synchronous or round-robin)");
  o.damping = a.damping;
  if (a.tol) o.tolerance = *a.tol;
  if (a.max_iter) o.max_sweeps = *a.max_iter;
  o.check();
  return o;
}

// Writes to --out/<name> when --out is set, otherwise to stdout.
void emit(const Args& a, const std::string& name, const std::string& text) {
  if (a.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(a.out);
  std::ofstream f(std::filesystem::path(a.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (std::filesystem::path(a.out) / name).string());
  f << text;
}

ExperimentConfig config_of(const Args& a, ExperimentId id, const char* fallback_gen) {
  ExperimentConfig c;
  c.experiment = id;
  c.model_file = a.model_file;
  c.generator = source_of(a, fallback_gen);
  if (!a.alpha_grid.empty()) c.alpha_grid = parse_grid(a.alpha_grid);
  if (!a.t_grid.empty()) c.t_grid = parse_grid(a.t_grid);
  if (!a.r_grid.empty()) c.r_grid = parse_grid(a.r_grid);
  if (!a.init_t_grid.empty()) c.init_t_grid = parse_grid(a.init_t_grid);
  c.alpha = a.alpha;
  c.newton = newton_opts(a);
  c.mp = mp_opts(a);
  c.out_dir = a.out.empty() ? "." : a.out;
  c.seed = a.seed;
  c.check();
  return c;
}

Vector initial_sigma(const NormalizedModel& model, const std::string& init) {
  if (init == "unit") return Vector::Ones(model.n());
  if (init == "exact") return exact_marginals(model.base()).sigma;
  if (init.rfind("t=", 0) == 0) {
    const std::vector<double> t = parse_grid(init.substr(2));
    if (t.size() != 1) throw UsageError("--init t=VALUE takes a single value");
    return make_inits(model, spectral(model), t).front();
  }
  throw UsageError("unknown init \"" + init + "\" (unit, exact or t=VALUE)");
}

int cmd_validate(const Args& a) {
  const GaussianModel model = load(a);
  const ValidationReport report = validate(model);
  std::cout << to_json(report).dump(2) << '\n';
  return report.ok() ? kOk : kInvalidModel;
}

int cmd_diagnose(const Args& a) {
  const NormalizedModel model = normalize(load(a));
  emit(a, "diagnose.json", to_json(diagnose(model, AlphaAssignment::uniform(model, a.alpha))).dump(2) + "\n");
  return kOk;
}

int cmd_minimize(const Args& a) {
  const NormalizedModel model = normalize(load(a));
  const MinimizeResult r =
      newton_minimize(model, AlphaAssignment::uniform(model, a.alpha), initial_sigma(model, a.init), newton_opts(a));
  emit(a, "minimize.json", to_json(r).dump(2) + "\n");
  return r.status == MinimizeStatus::Converged ? kOk : kNumeric;
}

int cmd_mp(const Args& a) {
  const NormalizedModel model = normalize(load(a));
  const MPResult r = run_message_passing(model, AlphaAssignment::uniform(model, a.alpha), mp_opts(a), spectral(model));
  emit(a, "mp.json", to_json(r).dump(2) + "\n");
  return r.status == MPStatus::Converged ? kOk : kNumeric;
}

int cmd_scan(const Args& a) {
  const NormalizedModel model = normalize(load(a));
  Vector direction;
  if (a.direction == "umax") direction = spectral(model).u_max;
  else if (a.direction == "ones") direction = Vector::Ones(model.n());
  else throw UsageError("unknown direction \"" + a.direction + "\" (umax or ones)");
  const std::vector<double> t = a.t_grid.empty() ? log_grid(1e-1, 1e3, 200) : parse_grid(a.t_grid);
  std::string csv;
  for (double alpha : a.alpha_grid.empty() ? std::vector<double>{a.alpha} : parse_grid(a.alpha_grid)) {
    const std::string part = scan_csv(ray_scan(model, AlphaAssignment::uniform(model, alpha), direction, t), alpha);
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
  }
  emit(a, "scan.csv", csv);
  return kOk;
}

int cmd_fig1(const Args& a) {
  if (!a.model_file.empty()) throw UsageError("fig1 takes a kregular --gen spec, not a model file");
  const ExperimentConfig c = config_of(a, ExperimentId::Fig1, "kregular:n=8,k=4,r=0.27");
  write_fig1(run_fig1(c), c);
  return kOk;
}

int cmd_fig2(const Args& a) {
  const char* fallback = "random:n=8,lambda=0.9,seed=1";
  const NormalizedModel model = normalize(load(a, fallback));
  const bool bounded = spectral(model).lambda_max < 1.0;
  const ExperimentConfig c = config_of(a, bounded ? ExperimentId::Fig2Bounded : ExperimentId::Fig2Unbounded, fallback);
  write_fig2(run_fig2(model, c), c);
  return kOk;
}

int cmd_compare(const Args& a) {
  const NormalizedModel model = normalize(load(a));
  const ExperimentConfig c = config_of(a, ExperimentId::Sweep, nullptr);
  emit(a, "compare.csv", comparison_csv(run_compare(model, c.alpha_grid, c.newton, c.mp)));
  if (!a.out.empty()) emit(a, "config.json", to_json(c).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field, Bethe and fractional Bethe inference for Gaussian MRFs"};
  app.require_subcommand(1);
  Args a;

  const std::map<std::string, std::pair<std::string, int (*)(const Args&)>> commands{
      {"validate", {"check a model file", cmd_validate}},
      {"diagnose", {"spectral radius of |R|, boundedness verdict, critical values", cmd_diagnose}},
      {"minimize", {"damped Newton on the constrained free energy", cmd_minimize}},
      {"mp", {"fractional message passing", cmd_mp}},
      {"scan", {"free energy along a ray t·u (CSV)", cmd_scan}},
      {"fig1", {"K-regular ray curves and local-minimum summary", cmd_fig1}},
      {"fig2", {"curves, Newton runs and sigma errors on one model", cmd_fig2}},
      {"compare", {"Newton vs message passing over an alpha grid (CSV)", cmd_compare}},
  };

  std::map<CLI::App*, int (*)(const Args&)> handlers;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    auto* model = sub->add_option("--model", a.model_file, "model JSON file");
    auto* gen = sub->add_option("--gen", a.gen, "generator, e.g. kregular:n=8,k=4,r=0.27 or random:n=8,lambda=0.9,seed=1");
    model->excludes(gen);
    sub->add_option("--alpha", a.alpha, "fractional parameter")->check(CLI::PositiveNumber);
    sub->add_option("--alpha-grid", a.alpha_grid, "lo:hi:count (log-spaced) or a,b,c");
    sub->add_option("--t-grid", a.t_grid, "ray parameter grid");
    sub->add_option("--r-grid", a.r_grid, "coupling grid (fig1)");
    sub->add_option("--init-t-grid", a.init_t_grid, "Newton starting points along u_max (fig2)");
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("--schedule", a.schedule, "synchronous or round-robin");
    sub->add_option("--damping", a.damping, "message damping in [0, 1)");
    sub->add_option("--tol", a.tol, "convergence tolerance");
    sub->add_option("--max-iter", a.max_iter, "Newton iterations or MP sweeps");
    sub->add_flag("--trace", a.trace, "record the Newton trace");
    sub->add_option("--init", a.init, "Newton start: unit, exact or t=VALUE");
    sub->add_option("--direction", a.direction, "scan direction: umax or ones");
    sub->add_option("--seed", a.seed, "recorded in config.json");
    handlers[sub] = entry.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (auto* sub : app.get_subcommands()) return handlers.at(sub)(a);
  } catch (const InvalidModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidModel;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {  // I/O failures
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
