#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weakal/label_space.hpp"

namespace weakal {

// One data point. true_fine is hidden ground truth: only annotators and the
// evaluator may read it; acquisition code goes through FeatureView instead.
struct Instance {
  int id = 0;
  std::vector<double> features;
  int true_fine = 0;
};

class Dataset {
 public:
  Dataset(std::vector<Instance> instances, int dim);

  int size() const { return static_cast<int>(instances_.size()); }
  int dim() const { return dim_; }
  const Instance& instance(int id) const;
  bool has(int id) const;
  const std::vector<Instance>& instances() const { return instances_; }
  std::vector<int> ids() const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<Instance> instances_;
  std::vector<int> index_of_id_;  // id -> position, -1 if absent
  int dim_ = 0;
};

// Learner-facing view of a dataset: ids and features only, no labels.
class FeatureView {
 public:
  explicit FeatureView(const Dataset& ds) : ds_(&ds) {}
  int dim() const { return ds_->dim(); }
  std::span<const double> features(int id) const { return ds_->instance(id).features; }
  std::vector<int> ids() const { return ds_->ids(); }

 private:
  const Dataset* ds_;
};

// Disjoint id-sets covering the whole dataset. Vectors are kept sorted.
struct PoolPartition {
  std::vector<int> initial;     // D_I
  std::vector<int> unlabeled;   // D_u
  std::vector<int> validation;
  std::vector<int> test;

  // Throws ConfigError unless the four sets partition the dataset ids.
  void validate(const Dataset& ds) const;
};

struct SynthConfig {
  int k_fine = 40;
  int k_weak = 10;
  int children_per_coarse = 4;
  int dim = 32;
  int per_class = 60;
  double inter_spread = 5.0;  // coarse-center scale
  double intra_spread = 1.0;  // fine-center offset scale within a coarse class
  double noise_scale = 1.0;   // isotropic instance noise
  std::uint64_t seed = 0;
};

// Gaussian cluster-of-clusters generator: coarse centers at the inter spread,
// fine centers perturbing their parent at the intra spread, instances adding
// isotropic noise. Deterministic given the seed.
std::pair<Dataset, LabelSpace> synth_generate(const SynthConfig& cfg);

// Feature CSV: header "id,label,f0,...,f{d-1}"; label is the fine-class name.
Dataset load_features(const std::string& path, const LabelSpace& space);
void save_features(const Dataset& ds, const LabelSpace& space, const std::string& path);

// Carves test/validation/initial sets per fine class; the rest of the ids
// becomes D_u. Deterministic given the seed.
PoolPartition split_initial(const Dataset& ds, const LabelSpace& space,
                            int init_per_class, int val_per_class,
                            int test_per_class, std::uint64_t seed);

}  // namespace weakal
