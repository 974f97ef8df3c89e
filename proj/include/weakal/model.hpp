#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weakal/transition.hpp"

namespace weakal {

// A labeled training/evaluation example. The feature span must outlive the
// call it is passed to.
struct Sample {
  std::span<const double> x;
  int y = 0;
};

enum class LossKind { fine_cross_entropy, weak_forward_corrected };

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs_per_phase = 50;
  int batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int patience = 0;  // 0 disables in-phase early abort; the val-argmin snapshot is always used
  std::uint64_t seed = 0;
  bool freeze_shared_phase2 = false;

  void validate() const;
};

// Shared-representation two-head softmax classifier: one hidden ReLU layer
// feeding a fine head (K_f) and a weak head (K_w). Parameters live in one
// flat vector so the optimizer and finite-difference checks can treat them
// uniformly.
class ClassifierModel {
 public:
  ClassifierModel(int dim, int hidden, int k_fine, int k_weak, std::uint64_t init_seed);

  int dim() const { return d_; }
  int hidden_size() const { return h_; }
  int k_fine() const { return kf_; }
  int k_weak() const { return kw_; }

  std::vector<double> forward_fine(std::span<const double> x) const;
  std::vector<double> forward_weak(std::span<const double> x) const;
  std::vector<double> hidden_activations(std::span<const double> x) const;
  std::vector<double> fine_logits(std::span<const double> x) const;
  std::vector<double> weak_logits(std::span<const double> x) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t n_params() const { return params_.size(); }
  std::size_t shared_param_count() const;  // leading block: W1 and b1

  // Mean loss over the batch; mean analytic gradients accumulated into grad
  // (same layout as params, overwritten). T is required for the corrected
  // weak loss and ignored otherwise.
  double batch_gradients(std::span<const Sample> batch, LossKind kind,
                         const TransitionMatrix* t, std::vector<double>& grad) const;

  double mean_loss(std::span<const Sample> batch, LossKind kind,
                   const TransitionMatrix* t) const;

  void save(const std::string& path) const;
  static ClassifierModel load(const std::string& path);

  bool operator==(const ClassifierModel& other) const;

 private:
  void check_dim(std::span<const double> x) const;
  std::vector<double> head_probs(std::span<const double> x, bool fine) const;
  std::vector<double> head_logits(std::span<const double> x, bool fine) const;

  int d_, h_, kf_, kw_;
  std::vector<double> params_;
};

struct EpochRecord {
  int phase = 0;  // 1 = weak, 2 = fine
  int epoch = 0;  // within phase
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_index = -1;       // index into epochs of the selected snapshot
  double best_val_loss = 0;  // validation loss of the returned parameters
};

// Weak-then-fine schedule: phase 1 minimizes the forward-corrected weak loss
// over weak_set, phase 2 fine cross-entropy over full_set; empty sets skip
// their phase. Validation fine cross-entropy is recorded after each epoch and
// the returned parameters are the epoch snapshot with minimum validation
// loss (ties: earliest). Deterministic given cfg.seed.
ClassifierModel train_model(ClassifierModel model,
                            std::span<const Sample> full_set,
                            std::span<const Sample> weak_set,
                            const TransitionMatrix& t,
                            std::span<const Sample> val_set,
                            const TrainConfig& cfg,
                            TrainHistory* history = nullptr);

// Fraction of samples whose argmax fine prediction equals the label; argmax
// ties resolve to the lowest class index. Empty set -> DomainError.
double evaluate_accuracy(const ClassifierModel& model, std::span<const Sample> test_set);

double prediction_entropy(std::span<const double> probs);

}  // namespace weakal
