#pragma once

#include <span>
#include <string>
#include <vector>

namespace weakal {

// Row-stochastic K_w x K_w matrix; entry (i, j) is the probability that the
// weak annotator outputs coarse class j when the true coarse class is i.
// Immutable after construction.
class TransitionMatrix {
 public:
  // Validates nonnegativity and row sums (tolerance 1e-9 on input), then
  // renormalizes each row exactly.
  TransitionMatrix(int k, std::vector<double> entries);

  static TransitionMatrix identity(int k);
  static TransitionMatrix uniform_rows(int k);

  int dim() const { return k_; }
  double at(int i, int j) const { return entries_[static_cast<std::size_t>(i) * k_ + j]; }
  std::span<const double> row(int i) const {
    return {entries_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)};
  }

  // Mean diagonal entry: the annotator's expected correctness.
  double mean_diagonal() const;

  void save_csv(const std::string& path) const;
  static TransitionMatrix load_csv(const std::string& path);

  bool operator==(const TransitionMatrix& other) const = default;

 private:
  int k_;
  std::vector<double> entries_;
};

// One trusted observation: the true coarse class (derived from a human fine
// label) paired with the weak annotator's prediction on the same instance.
struct TrustedPair {
  int true_coarse = 0;
  int vlm_pred = 0;       // ignored when abstained
  bool abstained = false;
};

// Row-wise count estimator with additive smoothing alpha. Rows with no
// observations fall back to the identity row when alpha = 0.
TransitionMatrix estimate_transition(const std::vector<TrustedPair>& pairs,
                                     int k_weak, double alpha);

// -log((T^t p)[y]) with a 1e-12 floor inside the log. p must be a probability
// vector within 1e-6 of unit mass.
double forward_corrected_loss(std::span<const double> p_weak,
                              const TransitionMatrix& t, int y_weak);

// Gradient of forward_corrected_loss(softmax(logits), t, y_weak) w.r.t. the
// logits.
std::vector<double> corrected_loss_gradient(std::span<const double> logits,
                                            const TransitionMatrix& t, int y_weak);

}  // namespace weakal
