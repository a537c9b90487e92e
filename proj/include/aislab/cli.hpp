#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "aislab/ais_dp.hpp"
#include "aislab/train.hpp"

namespace aislab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

using Json = nlohmann::json;

/// Worker count for seed fan-out: AISLAB_THREADS if set, else the hardware count.
int thread_budget();

// ---------------------------------------------------------------- environments

struct EnvSpec {
  std::string name = "toy";  // toy, pointmass or bandit
  int horizon = 0;           // 0: 50 for toy and pointmass, 1 for bandit
  double k = 100.0;          // toy penalty
  double gamma = 0.95;       // toy discount
  std::vector<int> start_states{0, 1, 2};
  double noise_std = 0.05;
  double goal = 0.0;
};

EnvSpec parse_env(const Json& j);
std::unique_ptr<Environment> make_env(const EnvSpec& spec);

/// Applies the keys of `j` to `config`; unknown keys raise InputError.
void apply_train_json(const Json& j, TrainConfig& config);

// ---------------------------------------------------------------- commands

struct BoundsConfig {
  std::uint64_t seed = 0;
  int random = 0;      // random instances seeded seed, seed+1, ...
  std::string preset;  // toy or identity; empty with random > 0 or an inline instance
  std::vector<int> partition{0, 1, 0, 1};  // toy preset quantizer
  std::vector<BoundIpm> ipms{BoundIpm::tv, BoundIpm::wasserstein, BoundIpm::mmd};
  int max_states = 8;
  int max_actions = 4;
  double slack = 1e-9;
  std::vector<int> start_states;
  Json mdp;        // inline instance, used with `generator`
  Json generator;
  std::string out = ".";
};

struct TrainRun {
  EnvSpec env;
  TrainConfig train;
  int seeds = 1;  // seeds seed, seed+1, ...
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct Variant {
  std::string label;
  TrainConfig train;
};

struct CompareConfig {
  EnvSpec env;
  TrainConfig base;
  std::vector<Variant> variants;
  int seeds = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
};

BoundsConfig parse_bounds(const Json& j);
TrainRun parse_train(const Json& j);
CompareConfig parse_compare(const Json& j);

struct BoundsResult {
  std::vector<BoundReport> reports;
  std::vector<std::string> counterexamples;  // file names written
  bool violated = false;
};

/// Writes bounds.csv (and counterexample_*.json) under config.out.
BoundsResult cmd_bounds(const BoundsConfig& config);

/// Median and interquartile range of a sample (linear interpolation between order statistics).
struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};
Quartiles quartiles(std::vector<double> values);

struct SeedRuns {
  std::vector<std::uint64_t> seeds;
  std::vector<TrainResult> results;
};

/// Trains every seed, fanned out over thread_budget() workers.
SeedRuns run_seeds(const Environment& env, const TrainConfig& config, std::uint64_t first_seed, int n_seeds);

/// Per-iteration median/IQR of mean_return across seeds.
std::string aggregate_csv_header();
std::vector<std::string> aggregate_csv_rows(const SeedRuns& runs, const std::string& label = "");

/// Writes metrics_seed<k>.csv, aggregate.csv, final.csv and curve.svg under run.out.
SeedRuns cmd_train(const TrainRun& run);
/// Writes compare.csv, compare.svg and one subdirectory per variant.
std::vector<SeedRuns> cmd_compare(const CompareConfig& config);

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
};
/// Line chart of medians with shaded IQR bands.
std::string svg_chart(const std::vector<Curve>& curves, const std::string& title, const std::string& y_label);
std::vector<Curve> curves_of(const SeedRuns& runs, const std::string& label);

// ---------------------------------------------------------------- toy analysis

struct MemorylessCase {
  std::vector<int> partition;  // canonical 2-class labeling
  std::vector<int> policy;     // action per feature
  Eigen::VectorXd value;
};

struct ToyAnalysis {
  double k = 100.0;
  double gamma = 0.95;
  std::vector<int> pi_star;
  Eigen::VectorXd v_star;
  bool codebook_matches = false;  // emitted actions equal pi*(state) on every branch
  long codebook_branches = 0;
  bool state3_unreachable = false;
  std::vector<MemorylessCase> memoryless;  // every 2-class partition x every policy
  /// Per partition: best value at state 2 over its 9 policies.
  std::vector<std::pair<std::vector<int>, double>> best_at_2;
  bool memoryless_claim = false;  // every case at least `margin` below v*(2)
  double margin = 10.0;
};

/// Value iteration, codebook controller check over `depth`-step rollouts and
/// the exhaustive memoryless enumeration on the toy MDP.
ToyAnalysis analyze_toy(double k = 100.0, double gamma = 0.95, int depth = 12);
/// Human-readable report; returns the exit code (1 when a claim fails).
int print_toy_report(const ToyAnalysis& analysis, std::ostream& out);

/// Entry point of the ais-lab executable.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace aislab::cli
