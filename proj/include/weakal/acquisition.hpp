#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakal/annotator.hpp"
#include "weakal/dataset.hpp"
#include "weakal/model.hpp"
#include "weakal/rational.hpp"
#include "weakal/transition.hpp"

namespace weakal {

// Uniform sample of k ids without replacement; deterministic given seed.
std::vector<int> select_random(const std::vector<int>& pool, int k, std::uint64_t seed);

// The k pool instances with largest fine-prediction entropy; ties by lower id.
std::vector<int> select_entropy(const ClassifierModel& model, const FeatureView& view,
                                const std::vector<int>& pool, int k);

// k-means++ seeding over last-layer gradient embeddings under the
// hypothesized label. The first pick is the max-norm embedding (ties by lower
// id); subsequent centers are sampled proportional to squared distance to the
// nearest chosen center.
std::vector<int> select_badge(const ClassifierModel& model, const FeatureView& view,
                              const std::vector<int>& pool, int k, std::uint64_t seed);

// Per-instance utilities of the two annotation actions. full_only marks
// upgrade candidates that already hold a weak label and may only be queried
// for a full one.
struct ScoredCandidate {
  int id = 0;
  double v_full = 0.0;
  double v_weak = 0.0;
  bool full_only = false;
};

// v_full = fine-prediction entropy; v_weak = mean-diagonal(T) times the
// entropy of the fine prediction marginalized onto coarse classes.
std::vector<ScoredCandidate> score_candidates(const ClassifierModel& model,
                                              const TransitionMatrix& t,
                                              const LabelSpace& space,
                                              const FeatureView& view,
                                              const std::vector<int>& pool);

struct PlanAction {
  int id = 0;
  Granularity granularity = Granularity::full;
  double ratio = 0.0;  // utility per unit cost
};

struct AllocationPlan {
  std::vector<int> full_ids;
  std::vector<int> weak_ids;
  Rational planned_cost;
  std::vector<PlanAction> actions;  // in the order taken

  double total_utility(const std::vector<ScoredCandidate>& scored) const;
};

// Single-sweep heuristic: actions sorted by descending utility-per-cost
// (ties: full before weak, then lower id), each taken iff it fits the
// remaining budget and its instance is untaken. Maximal but not optimal.
AllocationPlan allocate_greedy(const std::vector<ScoredCandidate>& scored,
                               const CostSchedule& sched, const Rational& budget);

// Exact allocator: dynamic program over budget units (the rational gcd of the
// two costs), maximizing total utility; a greedy fill pass afterwards
// guarantees maximality. Falls back to the greedy sweep when the unit count
// is impractically large.
AllocationPlan allocate_exact(const std::vector<ScoredCandidate>& scored,
                              const CostSchedule& sched, const Rational& budget);

// Default allocator used by the harness.
AllocationPlan allocate(const std::vector<ScoredCandidate>& scored,
                        const CostSchedule& sched, const Rational& budget);

void write_plan_jsonl(const AllocationPlan& plan, const std::string& path);

}  // namespace weakal
