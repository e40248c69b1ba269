#pragma once

// Experiment orchestration: seeded trajectories of (algorithm, noise, rep),
// per-pull pseudo-regret traces, aggregation and CSV output.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htlb/baselines.hpp"
#include "htlb/environment.hpp"
#include "htlb/master.hpp"

namespace htlb {

enum class Algo { supbmm, supbtc, mom, crt, menu, tofu };
/// `none` is a noiseless linear environment, useful for checks.
enum class NoiseKind { student_t, pareto, adversarial, none };

std::string_view to_string(Algo algo);
std::string_view to_string(NoiseKind noise);
Algo parse_algo(std::string_view name);
NoiseKind parse_noise(std::string_view name);

inline constexpr Algo kAllAlgos[] = {Algo::supbmm, Algo::supbtc, Algo::mom,
                                     Algo::crt,    Algo::menu,   Algo::tofu};

struct ExperimentConfig {
  std::vector<Algo> algos{std::begin(kAllAlgos), std::end(kAllAlgos)};
  std::vector<NoiseKind> noises{NoiseKind::student_t, NoiseKind::pareto};
  int d = 10;
  int K = 20;
  long T = 10000;
  double eps = 1.0;
  double delta = 0.01;
  std::optional<double> v_central;  // per-noise default when unset
  std::optional<double> v_raw;
  int reps = 10;
  std::uint64_t base_seed = 20200101;
  bool fixed_contexts = false;
  bool centered_pareto = false;
  bool full_trace = false;
  int jobs = 0;  // 0: hardware concurrency
  std::string out_path = "regret.csv";
};

/// Throws Error(invalid_parameter) on an unusable configuration.
void validate(const ExperimentConfig& config);

/// Central-moment bound (BMM-type algorithms): t(3) -> 3, pareto -> 1.
double effective_v_central(const ExperimentConfig& config, NoiseKind noise);
/// Raw-moment bound (truncation-type algorithms): t(3) -> 4, pareto -> 2.
double effective_v_raw(const ExperimentConfig& config, NoiseKind noise);

struct RegretTrace {
  Algo algo = Algo::supbmm;
  NoiseKind noise = NoiseKind::student_t;
  int rep = 0;
  /// cum_regret[i] is the cumulative pseudo-regret after pull i + 1.
  std::vector<double> cum_regret;
};

/// Round-based policy as seen by the simulator.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Payoffs observed per decision round.
  virtual int replications() const = 0;
  virtual int choose(const RoundContexts& contexts) = 0;
  virtual void observe(const RoundContexts& contexts, int arm, std::span<const double> payoffs) = 0;
};

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, Algo algo, NoiseKind noise);

/// Splitmix-style mix of (base_seed, algo, noise, rep).
std::uint64_t trace_seed(std::uint64_t base_seed, Algo algo, NoiseKind noise, int rep);

/// Runs `policy` until T pulls have been charged. The trace has exactly T entries.
RegretTrace simulate(const ExperimentConfig& config, NoiseKind noise, Policy& policy,
                     std::uint64_t seed);

RegretTrace run_one(const ExperimentConfig& config, Algo algo, NoiseKind noise, int rep);

/// Every (algo, noise, rep) combination, ordered by (algo, noise, rep).
std::vector<RegretTrace> run_all(const ExperimentConfig& config);

struct AggregateSeries {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

AggregateSeries aggregate(std::span<const RegretTrace> traces);

/// Pulls written for a trace of length T: every ceil(T/1000)-th pull plus the last.
std::vector<long> sampled_pulls(long T, bool full_trace = false);

void write_csv(std::span<const RegretTrace> traces, const std::filesystem::path& path,
               bool full_trace = false);
std::string format_csv(std::span<const RegretTrace> traces, bool full_trace = false);

struct CsvRow {
  std::string algo;
  std::string noise;
  int rep = 0;
  long pull = 0;
  double cum_regret = 0.0;
};

std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// Applies one `key=value` setting; keys mirror the CLI flag names without
/// the leading dashes. Throws Error(invalid_parameter) on unknown keys or
/// malformed values.
void apply_setting(std::string_view key, std::string_view value, ExperimentConfig& config);

/// Flat `key=value` file, `#` comments; keys mirror the CLI flag names.
/// Applies recognized keys onto `config`.
void apply_config_file(const std::filesystem::path& path, ExperimentConfig& config);
void apply_config_text(std::string_view text, ExperimentConfig& config);

}  // namespace htlb
