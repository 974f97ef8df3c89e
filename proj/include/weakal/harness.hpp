#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakal/acquisition.hpp"
#include "weakal/annotator.hpp"
#include "weakal/dataset.hpp"
#include "weakal/model.hpp"
#include "weakal/rational.hpp"
#include "weakal/transition.hpp"

namespace weakal {

enum class Method { random_full, entropy_full, badge_full, mixed_allocated };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct VlmConfig {
  double coarse_accuracy = 0.85;   // target diagonal mass of the simulator
  double abstain_prob = 0.0;
  bool nearest_neighbor_errors = true;  // spread errors over 3 nearest classes
};

struct SplitConfig {
  int init_per_class = 3;
  int val_per_class = 2;
  int test_per_class = 12;
};

enum class AllocatorKind { exact, greedy };

struct ExperimentConfig {
  int rounds = 5;
  Rational budget{150, 1};
  CostSchedule costs;
  std::vector<Method> methods{Method::mixed_allocated};
  bool correction_enabled = true;
  bool reestimate_each_round = true;
  bool allow_upgrade = true;
  bool warm_start = false;
  AllocatorKind allocator = AllocatorKind::exact;
  VlmConfig vlm;
  TrainConfig train;
  SynthConfig synth;
  SplitConfig split;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int hidden_size = 64;
  // When set, features/label space are read from files instead of synthesized.
  std::optional<std::string> features_path;
  std::optional<std::string> labelspace_path;

  void validate() const;
};

struct RoundReport {
  int round = 0;
  double test_accuracy = 0.0;
  long full_count = 0;        // cumulative full labels incl. the initial set
  long weak_count = 0;        // cumulative non-abstained weak labels
  long weak_active = 0;       // weak labels currently held (upgrades excluded)
  long full_purchased = 0;    // this round
  long weak_purchased = 0;    // this round (non-abstained)
  long abstained = 0;         // this round
  Rational cost_spent;        // this round
  double transition_mean_diag = 0.0;
  bool empty_plan = false;
  AllocationPlan plan;
};

struct ReplicateResult {
  Method method = Method::mixed_allocated;
  std::uint64_t seed = 0;
  double initial_accuracy = 0.0;
  std::vector<RoundReport> rounds;
  TransitionMatrix final_transition{TransitionMatrix::identity(2)};
};

struct AggregateRow {
  Method method;
  int round = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct ExperimentResult {
  std::vector<ReplicateResult> replicates;  // ordered by (method, seed) list order
  std::vector<AggregateRow> aggregate;
};

// Exact running ledger; every charge corresponds to one AnnotationRecord.
class BudgetLedger {
 public:
  void charge(const AnnotationRecord& rec);
  const Rational& total() const { return total_; }
  const Rational& total_for(Source s) const;
  const std::vector<Rational>& charges() const { return charges_; }

 private:
  std::vector<Rational> charges_;
  Rational total_;
  Rational by_source_[3];
};

// One seed of one method: fresh split, initial training on D_I, then
// cfg.rounds acquisition rounds. Retraining is from scratch each round unless
// warm_start is set.
ReplicateResult run_replicate(const ExperimentConfig& cfg, Method method,
                              const Dataset& ds, const LabelSpace& space,
                              std::uint64_t seed);

// All configured methods x seeds, plus per-round mean/std aggregates over
// seeds. Replicates may run on parallel threads (capped by the
// WEAKAL_MAX_PARALLEL environment variable); results are ordered by the
// config's method and seed lists regardless.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& ds,
                                const LabelSpace& space);

// Builds the dataset from the config (synthetic or file-based) and runs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Re-runs the experiment once per weak-cost value, everything else fixed.
std::vector<std::pair<Rational, ExperimentResult>> sweep_weak_cost(
    const ExperimentConfig& cfg, const std::vector<Rational>& c_weak_values);

struct RatioRow {
  Method method;
  std::uint64_t seed;
  int round;
  double full_fraction;
  double weak_fraction;
};

// Per-round share of full vs weak labels among all labeled training
// instances (initial set included).
std::vector<RatioRow> label_ratio_series(const ExperimentResult& result);

void write_metrics_csv(const ExperimentResult& result, const std::string& path);
void write_aggregate_csv(const ExperimentResult& result, const std::string& path);
void write_ratios_csv(const std::vector<RatioRow>& rows, const std::string& path);

}  // namespace weakal
