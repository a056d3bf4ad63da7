#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contdp/game.hpp"
#include "contdp/mechanism.hpp"
#include "contdp/noise.hpp"
#include "contdp/stream.hpp"

namespace contdp {

enum class MechanismChoice { kTree, kRecompute, kTrivial };

// Where a run's records come from. kUniform draws each bit independently
// with probability p; kFile replays a dataset file; the reduction sources
// replay the lower-bound streams built from a dataset file.
struct StreamSpec {
  enum class Source { kUniform, kFile, kReductionMarginals, kReductionKindsel };

  Source source = Source::kUniform;
  double p = 0.5;
  std::string path;
};

struct RunConfig {
  MechanismChoice mechanism = MechanismChoice::kTree;
  Variant variant = Variant::kSelect;
  std::int64_t T = 64;
  int d = 1;
  std::optional<double> rho;
  std::optional<double> eps;
  std::optional<double> delta;
  std::optional<std::int64_t> period;  // recompute period r
  bool period_auto = false;            // resolve r via optimal_period
  std::optional<NoiseKind> noise_override;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  StreamSpec stream;
  std::string out;  // output path; empty = don't write files
};

// Dataset file format: one record per line, bits as 0/1 characters, no
// separators; blank lines ignored. Throws ArgumentError on anything else.
std::vector<Record> load_dataset(const std::string& path);

// The records trial `trial` consumes, deterministic given (config, trial).
std::vector<Record> make_stream(const RunConfig& config, std::int64_t trial);

// Resolves the (rho | eps | eps,delta) flags into a budget. An (eps, delta)
// pair is substituted into rho = eps^2/(16 ln(1/delta)) because both
// mechanisms are zCDP/pure-DP native.
PrivacyBudget resolve_budget(const RunConfig& config);

// Builds the configured mechanism for one trial. An auto period that lands
// in the trivial regime yields TrivialMechanism.
std::unique_ptr<Mechanism> build_mechanism(const RunConfig& config,
                                           std::uint64_t seed);

// CSV with header `trial,t,truth,answer,err`; truth is the exact statistic
// under the configured variant. Deterministic given config.seed, byte-exact
// across thread schedules.
std::string run_csv(const RunConfig& config);

// Runs the trials, writes config.out (when set), returns the CSV bytes.
std::string cmd_run(const RunConfig& config);

struct SweepConfig {
  RunConfig base;
  std::vector<std::int64_t> T_values;   // one axis must have size > 1
  std::vector<double> rho_values;       // empty = use base budget
};

struct SweepPoint {
  double param = 0;
  double median_max_error = 0;
  double q_one_third = 0;
  double q_two_thirds = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::string csv;          // header `param,median_max_error,q_one_third,q_two_thirds`
  std::string plot_script;  // log-log matplotlib script consuming the CSV
};

// Aggregates per-trial max errors over the grid; writes `out` and
// `out`.plot.py when out is set.
SweepResult cmd_sweep(const SweepConfig& config);

// Least-squares slope of log(median max error) vs log(param) over the
// sweep points; the scaling-law check used by tests.
double sweep_loglog_slope(const std::vector<SweepPoint>& points);

enum class GameCommand { kCoupleTree, kCoupleRecompute, kAttack };

struct GameReport {
  std::int64_t trials = 0;
  std::int64_t mismatches = 0;        // couple-* only
  AdvantageEstimate advantage;        // attack only
  double dp_advantage_bound = 0;      // attack: (e^eps - 1)/(e^eps + 1), 0 if no budget
  std::string text;                   // human-readable summary
  std::string csv;
};

// couple-*: replays `trials` random adaptive adversaries on both sides and
// compares run_game against the matching simulator; any mismatch is a
// coupling failure. attack: estimates the distinguishing advantage of a
// scripted challenge adversary with a nearest-template guess rule.
GameReport cmd_game(GameCommand command, const RunConfig& config);

enum class ReduceCommand { kMarginals, kKindsel };

struct ReduceResult {
  std::vector<double> recovered;
  std::vector<double> exact;
  double max_deviation = 0;
  std::string csv;  // header `coord,recovered,exact,deviation`
};

// Runs the reduction stream built from the dataset file through the
// configured mechanism and post-processes the answers. For kKindsel the
// block count k is the record width divided by config.d.
ReduceResult cmd_reduce(ReduceCommand command, const RunConfig& config);

}  // namespace contdp
