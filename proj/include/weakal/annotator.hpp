#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakal/dataset.hpp"
#include "weakal/label_space.hpp"
#include "weakal/rational.hpp"
#include "weakal/rng.hpp"
#include "weakal/transition.hpp"

namespace weakal {

struct CostSchedule {
  Rational c_full{1, 1};
  Rational c_weak{1, 50};

  void validate() const;
};

enum class Source { human, vlm, external };
enum class Granularity { full, weak };

// One purchased annotation. Full records carry a fine index, weak records a
// coarse index; abstentions carry no label but are still charged.
struct AnnotationRecord {
  int instance_id = 0;
  Source source = Source::human;
  Granularity granularity = Granularity::full;
  std::optional<int> label;
  Rational cost_charged;
  bool abstained = false;
};

// Exact oracle: returns the hidden fine label at cost c_full.
AnnotationRecord human_annotate(const Instance& inst, const CostSchedule& sched);

struct VlmSimConfig {
  TransitionMatrix true_transition;  // generator T*, row-stochastic K_w x K_w
  double abstain_prob = 0.0;
  std::uint64_t seed = 0;
};

// Calibrated stochastic weak annotator. Labels are class-conditional draws
// from the configured transition matrix; the stream is deterministic given
// (seed, call order).
class VlmSimulator {
 public:
  explicit VlmSimulator(VlmSimConfig cfg);

  AnnotationRecord annotate(const Instance& inst, const LabelSpace& space,
                            const CostSchedule& sched);

  // Uncharged prediction used for transition estimation; abstentions are
  // reported with abstained = true.
  TrustedPair zero_shot(const Instance& inst, const LabelSpace& space);

  const TransitionMatrix& true_transition() const { return cfg_.true_transition; }

 private:
  int draw(int true_coarse);  // -1 on abstention

  VlmSimConfig cfg_;
  Rng rng_;
};

// Builds a transition matrix with the given diagonal mass. The off-diagonal
// mass (1 - diag) goes uniformly to each row's 3 nearest coarse classes by
// class-center distance when centers are provided, else uniformly to all
// other classes.
TransitionMatrix make_calibrated_transition(
    int k_weak, double diag_accuracy,
    const std::vector<std::vector<double>>* coarse_centers = nullptr);

// Mean feature vector per coarse class; annotator-side helper (reads hidden
// labels).
std::vector<std::vector<double>> coarse_class_centers(const Dataset& ds,
                                                      const LabelSpace& space);

// External-annotator file protocol (JSONL, matched by id).
void write_annotation_requests(const std::string& path, const std::vector<int>& ids,
                               const LabelSpace& space,
                               const std::string& hint = "");
std::vector<AnnotationRecord> external_annotate_batch(const std::string& request_path,
                                                      const std::string& response_path,
                                                      const LabelSpace& space,
                                                      const CostSchedule& sched);

}  // namespace weakal
