#include "fbethe/harness.hpp"

#include "fbethe/exact.hpp"
#include "fbethe/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fbethe {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("cannot parse " + std::string(what) + " from \"" + s + "\"");
  return value;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_config(const ExperimentConfig& config) {
  write_text(config.out_dir / "config.json", to_json(config).dump(2) + "\n");
}

}  // namespace

GeneratorSpec GeneratorSpec::parse(std::string_view text) {
  GeneratorSpec spec;
  const auto colon = text.find(':');
  spec.kind = trim(text.substr(0, colon));
  if (spec.kind.empty()) throw UsageError("generator spec needs a kind: \"" + std::string(text) + "\"");
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw UsageError("generator spec item without '=': \"" + std::string(item) + "\"");
    spec.params.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

std::optional<std::string> GeneratorSpec::get(std::string_view key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  return std::nullopt;
}

double GeneratorSpec::number(std::string_view key, std::optional<double> fallback) const {
  if (const auto v = get(key)) return parse_number(*v, key);
  if (fallback) return *fallback;
  throw UsageError("generator \"" + kind + "\" needs " + std::string(key) + "=");
}

std::string GeneratorSpec::str() const {
  std::string out = kind;
  for (std::size_t k = 0; k < params.size(); ++k)
    out += (k ? "," : ":") + params[k].first + "=" + params[k].second;
  return out;
}

GaussianModel generate_model(const GeneratorSpec& spec) {
  auto as_int = [&](std::string_view key, std::optional<double> fallback = std::nullopt) {
    const double v = spec.number(key, fallback);
    if (v != std::floor(v)) throw UsageError(std::string(key) + " must be an integer");
    return static_cast<int>(v);
  };
  if (spec.kind == "kregular") {
    const int n = as_int("n");
    return make_k_regular(n, as_int("k"), spec.number("r"), Vector::Constant(n, spec.number("h", 0.0)));
  }
  if (spec.kind == "random") {
    return random_model(as_int("n", 8), spec.number("density", 0.5), spec.number("lambda"),
                        static_cast<std::uint64_t>(as_int("seed", 1)));
  }
  if (spec.kind == "tree") {
    return random_tree_model(as_int("n"), spec.number("lambda", 0.8), static_cast<std::uint64_t>(as_int("seed", 1)));
  }
  throw UsageError("unknown generator kind \"" + spec.kind + "\" (expected kregular, random or tree)");
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> grid;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    const double lo = parse_number(text.substr(0, c1), "grid start");
    const double hi = parse_number(text.substr(c1 + 1, c2 - c1 - 1), "grid end");
    const double count = parse_number(text.substr(c2 + 1), "grid count");
    if (count < 1 || count != std::floor(count)) throw UsageError("grid count must be a positive integer");
    return log_grid(lo, hi, static_cast<int>(count));
  }
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    grid.push_back(parse_number(rest.substr(0, comma), "grid value"));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (grid.empty()) throw UsageError("empty grid");
  return grid;
}

std::string_view to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::Fig1: return "fig1";
    case ExperimentId::Fig2Bounded: return "fig2-bounded";
    case ExperimentId::Fig2Unbounded: return "fig2-unbounded";
    case ExperimentId::Sweep: return "sweep";
  }
  return "unknown";
}

ExperimentId parse_experiment(std::string_view text) {
  for (auto id : {ExperimentId::Fig1, ExperimentId::Fig2Bounded, ExperimentId::Fig2Unbounded, ExperimentId::Sweep})
    if (to_string(id) == text) return id;
  throw UsageError("unknown experiment \"" + std::string(text) + "\"");
}

void ExperimentConfig::check() const {
  auto positive = [](const std::vector<double>& g, const char* name, bool allow_empty) {
    if (g.empty() && !allow_empty) throw UsageError(std::string(name) + " must not be empty");
    for (double v : g)
      if (!(v > 0.0)) throw UsageError(std::string(name) + " values must be positive");
  };
  positive(alpha_grid, "alpha grid", false);
  positive(t_grid, "t grid", false);
  positive(r_grid, "r grid", true);
  positive(init_t_grid, "init t grid", false);
  if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
  newton.check();
  mp.check();
}

json to_json(const ExperimentConfig& c) {
  return json{{"experiment", std::string(to_string(c.experiment))},
              {"model_file", c.model_file},
              {"generator", c.generator},
              {"alpha_grid", c.alpha_grid},
              {"t_grid", c.t_grid},
              {"r_grid", c.r_grid},
              {"init_t_grid", c.init_t_grid},
              {"alpha", c.alpha},
              {"newton",
               {{"tolerance", c.newton.tolerance},
                {"max_iterations", c.newton.max_iterations},
                {"value_floor", c.newton.value_floor},
                {"armijo", c.newton.armijo},
                {"shrink", c.newton.shrink},
                {"max_halvings", c.newton.max_halvings}}},
              {"mp",
               {{"schedule", std::string(to_string(c.mp.schedule))},
                {"damping", c.mp.damping},
                {"tolerance", c.mp.tolerance},
                {"max_sweeps", c.mp.max_sweeps}}},
              {"seed", c.seed}};
}

// --- fig1 -------------------------------------------------------------------

Fig1Result run_fig1(const ExperimentConfig& config) {
  config.check();
  const GeneratorSpec spec = GeneratorSpec::parse(config.generator.empty() ? "kregular:n=8,k=4,r=0.27" : config.generator);
  if (spec.kind != "kregular") throw UsageError("fig1 needs a kregular generator");

  Fig1Result out;
  out.n = static_cast<int>(spec.number("n"));
  out.K = static_cast<int>(spec.number("k"));
  out.r = spec.number("r");
  out.alpha = config.alpha;
  out.r_valid = r_valid(out.n, out.K);
  if (out.K * out.r >= 1.0) out.alpha_c = critical_alpha(out.K, out.r);
  if (out.alpha < out.K) out.r_c = critical_r(out.K, out.alpha);

  const Vector ones = Vector::Ones(out.n);
  const RaySearchOptions search{config.t_grid.front(), config.t_grid.back(),
                                std::max(400, static_cast<int>(config.t_grid.size())), 1e-10};
  auto predicted = [&](double r, double alpha) {
    const double kr = out.K * r;
    return kr < 1.0 || alpha < critical_alpha(out.K, r);
  };

  const NormalizedModel left = normalize(generate_model(spec));
  for (double alpha : config.alpha_grid) {
    const AlphaAssignment alphas = AlphaAssignment::uniform(left, alpha);
    for (const RayPoint& p : ray_scan(left, alphas, ones, config.t_grid)) out.curves.push_back({"alpha", alpha, p.t, p.value});
    out.summary.push_back({"alpha", alpha, find_local_minimum_on_ray(left, alphas, ones, search), predicted(out.r, alpha)});
  }

  std::vector<double> r_grid = config.r_grid;
  if (r_grid.empty()) {
    for (int k = 1; k <= 18; ++k) r_grid.push_back(out.r_valid * k / 19.0);
  }
  for (double r : r_grid) {
    if (!(r < out.r_valid)) throw UsageError("fig1: r = " + format_double(r) + " is not below r_valid");
    const NormalizedModel model = normalize(make_k_regular(out.n, out.K, r));
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, config.alpha);
    for (const RayPoint& p : ray_scan(model, alphas, ones, config.t_grid)) out.curves.push_back({"r", r, p.t, p.value});
    out.summary.push_back({"r", r, find_local_minimum_on_ray(model, alphas, ones, search), predicted(r, config.alpha)});
  }
  return out;
}

void write_fig1(const Fig1Result& result, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ostringstream curves;
  curves << "panel,param,t,value\n";
  for (const auto& row : result.curves)
    curves << row.panel << ',' << format_double(row.param) << ',' << format_double(row.t) << ','
           << format_double(row.value) << '\n';
  write_text(config.out_dir / "fig1_curves.csv", curves.str());

  std::ostringstream summary;
  summary << "panel,param,local_min_found,t_star,value_star,predicted,n,K,r,alpha,r_valid,alpha_c,r_c\n";
  for (const auto& s : result.summary) {
    summary << s.panel << ',' << format_double(s.param) << ',' << (s.local_minimum ? 1 : 0) << ','
            << cell(s.local_minimum ? std::optional(s.local_minimum->t) : std::nullopt) << ','
            << cell(s.local_minimum ? std::optional(s.local_minimum->value) : std::nullopt) << ','
            << (s.predicted ? 1 : 0) << ',' << result.n << ',' << result.K << ',' << format_double(result.r) << ','
            << format_double(result.alpha) << ',' << format_double(result.r_valid) << ',' << cell(result.alpha_c)
            << ',' << cell(result.r_c) << '\n';
  }
  write_text(config.out_dir / "fig1_summary.csv", summary.str());
  write_config(config);
}

// --- fig2 / compare -----------------------------------------------------------

MPResult run_message_passing(const NormalizedModel& model, const AlphaAssignment& alphas, const MPOptions& opts,
                             const SpectralResult& spectrum) {
  const bool normalizable = spectrum.lambda_max < 1.0 - kBoundaryBand;
  const Partition partition = normalizable ? partition_normalizable(model, spectrum) : partition_symmetric(model);
  const MessageSet init =
      init_messages(model, partition, normalizable ? InitScheme::Unit : InitScheme::SymmetricNormalizing);
  MPResult result = mp_run(model, alphas, partition, init, opts);
  if (result.status == MPStatus::Converged || opts.damping >= kFallbackDamping) return result;
  MPOptions retry = opts;
  retry.damping = kFallbackDamping;
  retry.max_sweeps = std::max(opts.max_sweeps, kFallbackSweeps);
  return mp_run(model, alphas, partition, init, retry);
}

Fig2Result run_fig2(const NormalizedModel& model, const ExperimentConfig& config) {
  config.check();
  Fig2Result out;
  const SpectralResult spectrum = spectral(model);
  out.lambda_max = spectrum.lambda_max;
  const Vector m = optimal_mean(model);
  const Vector& u = spectrum.u_max;
  const ExactMarginals exact = exact_marginals(model.base());
  const AlphaAssignment bethe = AlphaAssignment::uniform(model, 1.0);

  for (double t : config.t_grid) {
    const Vector sigma = t * u;
    out.curves.push_back({"mf", std::nullopt, t, f_mean_field(model, m, sigma).value});
    out.curves.push_back({"bethe", 1.0, t, f_constrained(model, bethe, m, sigma).value});
    out.curves.push_back({"lower", std::nullopt, t, f_lower_bound(model, m, sigma).value});
  }
  for (double alpha : config.alpha_grid) {
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, alpha);
    for (const RayPoint& p : ray_scan(model, alphas, u, config.t_grid)) out.curves.push_back({"frac", alpha, p.t, p.value});
  }

  const std::vector<Vector> inits = make_inits(model, spectrum, config.init_t_grid);
  std::vector<std::string> labels;
  for (double t : config.init_t_grid) labels.push_back("t=" + format_double(t));
  labels.emplace_back("unit");
  labels.emplace_back("exact");

  for (double alpha : config.alpha_grid) {
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, alpha);
    for (std::size_t k = 0; k < inits.size(); ++k) {
      const MinimizeResult r = newton_minimize(model, alphas, inits[k], config.newton);
      const bool ok = r.status == MinimizeStatus::Converged;
      out.newton.push_back({alpha, labels[k], r.status, ok ? std::optional(r.value.value) : std::nullopt, r.iterations});
    }

    Fig2ErrorRow row;
    row.alpha = alpha;
    const MinimizeResult nr = newton_minimize(model, alphas, Vector::Ones(model.n()), config.newton);
    row.newton_status = nr.status;
    if (nr.status == MinimizeStatus::Converged) row.newton_error = sigma_error(nr.moments.sigma, exact);
    const MPResult mr = run_message_passing(model, alphas, config.mp, spectrum);
    row.mp_status = mr.status;
    if (mr.status == MPStatus::Converged) row.mp_error = sigma_error(mr.beliefs.sigma, exact);
    out.errors.push_back(row);
  }
  return out;
}

void write_fig2(const Fig2Result& result, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ostringstream curves;
  curves << "curve,alpha,t,value\n";
  for (const auto& row : result.curves)
    curves << row.curve << ',' << cell(row.alpha) << ',' << format_double(row.t) << ',' << format_double(row.value) << '\n';
  write_text(config.out_dir / "fig2_curves.csv", curves.str());

  std::ostringstream newton;
  newton << "alpha,init,status,value,iterations\n";
  for (const auto& row : result.newton)
    newton << format_double(row.alpha) << ',' << row.init << ',' << to_string(row.status) << ',' << cell(row.value) << ','
           << row.iterations << '\n';
  write_text(config.out_dir / "fig2_newton.csv", newton.str());

  std::ostringstream errors;
  errors << "alpha,newton_status,newton_sigma_error,mp_status,mp_sigma_error\n";
  for (const auto& row : result.errors)
    errors << format_double(row.alpha) << ',' << to_string(row.newton_status) << ',' << cell(row.newton_error) << ','
           << to_string(row.mp_status) << ',' << cell(row.mp_error) << '\n';
  write_text(config.out_dir / "fig2_errors.csv", errors.str());
  write_config(config);
}

std::vector<ComparisonRow> run_compare(const NormalizedModel& model, const std::vector<double>& alpha_grid,
                                       const NewtonOptions& newton, const MPOptions& mp) {
  const SpectralResult spectrum = spectral(model);
  const ExactMarginals exact = exact_marginals(model.base());
  const Vector m = optimal_mean(model);
  std::vector<ComparisonRow> rows;
  for (double alpha : alpha_grid) {
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, alpha);
    ComparisonRow row;
    row.alpha = alpha;
    row.verdict = classify(model, alphas, spectrum);

    const MinimizeResult nr = newton_minimize(model, alphas, Vector::Ones(model.n()), newton);
    row.newton_status = nr.status;
    const bool newton_ok = nr.status == MinimizeStatus::Converged;
    if (newton_ok) {
      row.newton_value = nr.value.value;
      row.newton_sigma_error = sigma_error(nr.moments.sigma, exact);
    }

    const MPResult mr = run_message_passing(model, alphas, mp, spectrum);
    row.mp_status = mr.status;
    const bool mp_ok = mr.status == MPStatus::Converged;
    if (mp_ok) {
      row.mp_value = f_constrained(model, alphas, m, mr.beliefs.sigma).value;
      row.mp_sigma_error = sigma_error(mr.beliefs.sigma, exact);
    }
    if (newton_ok && mp_ok) row.agreement_gap = (nr.moments.sigma - mr.beliefs.sigma).lpNorm<Eigen::Infinity>();
    row.exactly_one_converged = newton_ok != mp_ok;
    rows.push_back(row);
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "alpha,verdict,lambda_max,newton_status,newton_value,mp_status,mp_value,newton_sigma_error,mp_sigma_error,"
        "agreement_gap,exactly_one_converged\n";
  for (const auto& r : rows) {
    os << format_double(r.alpha) << ',' << to_string(r.verdict.verdict) << ',' << format_double(r.verdict.lambda_max)
       << ',' << to_string(r.newton_status) << ',' << cell(r.newton_value) << ',' << to_string(r.mp_status) << ','
       << cell(r.mp_value) << ',' << cell(r.newton_sigma_error) << ',' << cell(r.mp_sigma_error) << ','
       << cell(r.agreement_gap) << ',' << (r.exactly_one_converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string scan_csv(const std::vector<RayPoint>& points, double alpha) {
  std::ostringstream os;
  os << "t,value,alpha\n";
  for (const auto& p : points) os << format_double(p.t) << ',' << format_double(p.value) << ',' << format_double(alpha) << '\n';
  return os.str();
}

}  // namespace fbethe
