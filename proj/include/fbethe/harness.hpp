#pragma once

#include "fbethe/diagnostics.hpp"
#include "fbethe/message_passing.hpp"
#include "fbethe/minimizer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbethe {

/// Parsed form of "kind:key=value,key=value". Known kinds:
///   kregular:n=8,k=4,r=0.27[,h=0]
///   random:n=8,lambda=0.9,seed=1[,density=0.5]
///   tree:n=10,lambda=0.8,seed=1
struct GeneratorSpec {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;

  static GeneratorSpec parse(std::string_view text);
  std::optional<std::string> get(std::string_view key) const;
  double number(std::string_view key, std::optional<double> fallback = std::nullopt) const;
  std::string str() const;
};

GaussianModel generate_model(const GeneratorSpec& spec);

/// Grid given as "lo:hi:count" (log-spaced) or "a,b,c" (explicit list).
std::vector<double> parse_grid(std::string_view text);

enum class ExperimentId { Fig1, Fig2Bounded, Fig2Unbounded, Sweep };

std::string_view to_string(ExperimentId id);
ExperimentId parse_experiment(std::string_view text);

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::Fig1;
  std::string model_file;  // empty when generated
  std::string generator;   // generator spec text
  std::vector<double> alpha_grid = log_grid(1e-2, 1e2, 25);
  std::vector<double> t_grid = log_grid(1e-1, 1e3, 200);
  std::vector<double> r_grid;      // fig1 right panel; empty = default
  std::vector<double> init_t_grid = log_grid(1e-1, 1e3, 18);
  double alpha = 1.0;              // fixed α of the fig1 right panel
  NewtonOptions newton;
  MPOptions mp;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;

  void check() const;
};

nlohmann::json to_json(const ExperimentConfig& config);

/// One curve sample; `param` is α or r depending on the panel.
struct CurveRow {
  std::string panel;
  double param = 0.0;
  double t = 0.0;
  double value = 0.0;
};

struct Fig1Summary {
  std::string panel;
  double param = 0.0;
  std::optional<RayMinimum> local_minimum;
  bool predicted = false;  // local minimum expected from the K-regular critical values
};

struct Fig1Result {
  int n = 0;
  int K = 0;
  double r = 0.0;
  double alpha = 1.0;
  double r_valid = 0.0;
  std::optional<double> alpha_c;  // α_c(K, r) when Kr >= 1
  std::optional<double> r_c;      // r_c(K, α) when α < K
  std::vector<CurveRow> curves;
  std::vector<Fig1Summary> summary;
};

/// Left panel: g(t) = F^c_α(t·1) over the α grid at the generator's r.
/// Right panel: the same over the r grid at fixed α.
Fig1Result run_fig1(const ExperimentConfig& config);
void write_fig1(const Fig1Result& result, const ExperimentConfig& config);

struct Fig2CurveRow {
  std::string curve;  // mf | bethe | lower | frac
  std::optional<double> alpha;
  double t = 0.0;
  double value = 0.0;
};

struct Fig2NewtonRow {
  double alpha = 0.0;
  std::string init;
  MinimizeStatus status = MinimizeStatus::IterationCap;
  std::optional<double> value;  // only when converged
  int iterations = 0;
};

struct Fig2ErrorRow {
  double alpha = 0.0;
  std::optional<double> newton_error;
  std::optional<double> mp_error;
  MinimizeStatus newton_status = MinimizeStatus::IterationCap;
  MPStatus mp_status = MPStatus::IterationCap;
};

struct Fig2Result {
  double lambda_max = 0.0;
  std::vector<Fig2CurveRow> curves;
  std::vector<Fig2NewtonRow> newton;
  std::vector<Fig2ErrorRow> errors;
};

Fig2Result run_fig2(const NormalizedModel& model, const ExperimentConfig& config);
void write_fig2(const Fig2Result& result, const ExperimentConfig& config);

struct ComparisonRow {
  double alpha = 0.0;
  BoundednessVerdict verdict;
  MinimizeStatus newton_status = MinimizeStatus::IterationCap;
  std::optional<double> newton_value;
  MPStatus mp_status = MPStatus::IterationCap;
  std::optional<double> mp_value;
  std::optional<double> newton_sigma_error;
  std::optional<double> mp_sigma_error;
  std::optional<double> agreement_gap;  // max |σ_newton − σ_mp|, both converged only
  bool exactly_one_converged = false;
};

/// Runs Newton (from σ = 1) and message passing per α. Pairwise-normalizable
/// models use the normalizable partition with unit messages; otherwise the
/// symmetric partition with symmetric normalizing messages.
std::vector<ComparisonRow> run_compare(const NormalizedModel& model, const std::vector<double>& alpha_grid,
                                       const NewtonOptions& newton, const MPOptions& mp);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Message passing with the partition/initialization pair chosen from the
/// model's spectrum (see run_compare). A run that does not converge with
/// damping below kFallbackDamping is repeated once with that damping and at
/// least kFallbackSweeps sweeps; undamped power-EP with α well above 1 can
/// make a tilted pair improper within the first sweeps.
inline constexpr double kFallbackDamping = 0.5;
inline constexpr int kFallbackSweeps = 100000;

MPResult run_message_passing(const NormalizedModel& model, const AlphaAssignment& alphas, const MPOptions& opts,
                             const SpectralResult& spectrum);

/// CSV of a ray scan with columns t,value,alpha.
std::string scan_csv(const std::vector<RayPoint>& points, double alpha);

}  // namespace fbethe
