#include "weakal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "weakal/errors.hpp"
#include "weakal/rng.hpp"

namespace weakal {

namespace {

constexpr double kLogFloor = 1e-12;

// Parameter layout offsets: [W1(d*h) | b1(h) | Wf(h*kf) | bf(kf) | Ww(h*kw) | bw(kw)].
struct Layout {
  std::size_t w1, b1, wf, bf, ww, bw, total;
  Layout(int d, int h, int kf, int kw) {
    w1 = 0;
    b1 = w1 + static_cast<std::size_t>(d) * h;
    wf = b1 + h;
    bf = wf + static_cast<std::size_t>(h) * kf;
    ww = bf + kf;
    bw = ww + static_cast<std::size_t>(h) * kw;
    total = bw + kw;
  }
};

void softmax_inplace(std::vector<double>& z) {
  double max_z = z[0];
  for (double v : z) max_z = std::max(max_z, v);
  double denom = 0.0;
  for (double& v : z) denom += (v = std::exp(v - max_z));
  for (double& v : z) v /= denom;
}

double log_sum_exp(const std::vector<double>& z) {
  double max_z = z[0];
  for (double v : z) max_z = std::max(max_z, v);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - max_z);
  return max_z + std::log(sum);
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (epochs_per_phase < 1) throw ConfigError("epochs_per_phase must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigError("Adam decay coefficients must lie in [0, 1)");
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  if (patience < 0) throw ConfigError("patience must be nonnegative");
}

ClassifierModel::ClassifierModel(int dim, int hidden, int k_fine, int k_weak,
                                 std::uint64_t init_seed)
    : d_(dim), h_(hidden), kf_(k_fine), kw_(k_weak) {
  if (d_ <= 0 || h_ <= 0 || kf_ <= 0 || kw_ <= 0)
    throw ConfigError("model dimensions must be positive");
  const Layout lay(d_, h_, kf_, kw_);
  params_.assign(lay.total, 0.0);
  // Symmetric uniform init scaled by 1/sqrt(fan-in); biases start at zero.
  Rng rng(mix_seed(init_seed, 0x1417));
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d_));
  for (std::size_t i = lay.w1; i < lay.b1; ++i) params_[i] = s1 * (2.0 * rng.uniform() - 1.0);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h_));
  for (std::size_t i = lay.wf; i < lay.bf; ++i) params_[i] = s2 * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = lay.ww; i < lay.bw; ++i) params_[i] = s2 * (2.0 * rng.uniform() - 1.0);
}

std::size_t ClassifierModel::shared_param_count() const {
  const Layout lay(d_, h_, kf_, kw_);
  return lay.wf;
}

void ClassifierModel::check_dim(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_)
    throw DomainError("feature dimension " + std::to_string(x.size()) +
                      " does not match model input " + std::to_string(d_));
}

std::vector<double> ClassifierModel::hidden_activations(std::span<const double> x) const {
  check_dim(x);
  const Layout lay(d_, h_, kf_, kw_);
  std::vector<double> hid(h_);
  for (int j = 0; j < h_; ++j) {
    double z = params_[lay.b1 + j];
    const double* w = &params_[lay.w1 + static_cast<std::size_t>(j) * d_];
    for (int i = 0; i < d_; ++i) z += w[i] * x[i];
    hid[j] = z > 0.0 ? z : 0.0;
  }
  return hid;
}

std::vector<double> ClassifierModel::head_logits(std::span<const double> x, bool fine) const {
  const Layout lay(d_, h_, kf_, kw_);
  const auto hid = hidden_activations(x);
  const int k = fine ? kf_ : kw_;
  const std::size_t w_off = fine ? lay.wf : lay.ww;
  const std::size_t b_off = fine ? lay.bf : lay.bw;
  std::vector<double> z(k);
  for (int c = 0; c < k; ++c) {
    double v = params_[b_off + c];
    const double* w = &params_[w_off + static_cast<std::size_t>(c) * h_];
    for (int j = 0; j < h_; ++j) v += w[j] * hid[j];
    z[c] = v;
  }
  return z;
}

std::vector<double> ClassifierModel::head_probs(std::span<const double> x, bool fine) const {
  auto z = head_logits(x, fine);
  softmax_inplace(z);
  return z;
}

std::vector<double> ClassifierModel::forward_fine(std::span<const double> x) const {
  return head_probs(x, true);
}
std::vector<double> ClassifierModel::forward_weak(std::span<const double> x) const {
  return head_probs(x, false);
}
std::vector<double> ClassifierModel::fine_logits(std::span<const double> x) const {
  return head_logits(x, true);
}
std::vector<double> ClassifierModel::weak_logits(std::span<const double> x) const {
  return head_logits(x, false);
}

double ClassifierModel::batch_gradients(std::span<const Sample> batch, LossKind kind,
                                        const TransitionMatrix* t,
                                        std::vector<double>& grad) const {
  if (batch.empty()) throw DomainError("gradient batch must be non-empty");
  const bool fine = kind == LossKind::fine_cross_entropy;
  if (!fine && (t == nullptr || t->dim() != kw_))
    throw ConfigError("corrected weak loss needs a K_w x K_w transition matrix");
  const Layout lay(d_, h_, kf_, kw_);
  grad.assign(lay.total, 0.0);
  const int k = fine ? kf_ : kw_;
  const std::size_t w_off = fine ? lay.wf : lay.ww;
  const std::size_t b_off = fine ? lay.bf : lay.bw;

  double total_loss = 0.0;
  std::vector<double> pre(h_), hid(h_), z(k), dz(k), dhid(h_);
  for (const Sample& s : batch) {
    check_dim(s.x);
    if (s.y < 0 || s.y >= k) throw DomainError("label out of range in batch");
    for (int j = 0; j < h_; ++j) {
      double v = params_[lay.b1 + j];
      const double* w = &params_[lay.w1 + static_cast<std::size_t>(j) * d_];
      for (int i = 0; i < d_; ++i) v += w[i] * s.x[i];
      pre[j] = v;
      hid[j] = v > 0.0 ? v : 0.0;
    }
    for (int c = 0; c < k; ++c) {
      double v = params_[b_off + c];
      const double* w = &params_[w_off + static_cast<std::size_t>(c) * h_];
      for (int j = 0; j < h_; ++j) v += w[j] * hid[j];
      z[c] = v;
    }
    const double lse = log_sum_exp(z);
    for (int c = 0; c < k; ++c) dz[c] = std::exp(z[c] - lse);  // softmax probs

    if (fine) {
      total_loss += lse - z[s.y];
      dz[s.y] -= 1.0;  // p - onehot
    } else {
      double mix = 0.0;
      for (int c = 0; c < k; ++c) mix += dz[c] * t->at(c, s.y);
      total_loss += -std::log(std::max(mix, kLogFloor));
      const double inv = 1.0 / std::max(mix, kLogFloor);
      for (int c = 0; c < k; ++c) dz[c] = dz[c] * (1.0 - t->at(c, s.y) * inv);
    }

    for (int c = 0; c < k; ++c) {
      grad[b_off + c] += dz[c];
      double* gw = &grad[w_off + static_cast<std::size_t>(c) * h_];
      const double* w = &params_[w_off + static_cast<std::size_t>(c) * h_];
      for (int j = 0; j < h_; ++j) gw[j] += dz[c] * hid[j];
      (void)w;
    }
    for (int j = 0; j < h_; ++j) {
      double v = 0.0;
      for (int c = 0; c < k; ++c)
        v += params_[w_off + static_cast<std::size_t>(c) * h_ + j] * dz[c];
      dhid[j] = pre[j] > 0.0 ? v : 0.0;
    }
    for (int j = 0; j < h_; ++j) {
      grad[lay.b1 + j] += dhid[j];
      double* gw = &grad[lay.w1 + static_cast<std::size_t>(j) * d_];
      for (int i = 0; i < d_; ++i) gw[i] += dhid[j] * s.x[i];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv_n;
  return total_loss * inv_n;
}

double ClassifierModel::mean_loss(std::span<const Sample> batch, LossKind kind,
                                  const TransitionMatrix* t) const {
  if (batch.empty()) throw DomainError("loss batch must be non-empty");
  const bool fine = kind == LossKind::fine_cross_entropy;
  double total = 0.0;
  for (const Sample& s : batch) {
    auto z = head_logits(s.x, fine);
    const int k = static_cast<int>(z.size());
    if (s.y < 0 || s.y >= k) throw DomainError("label out of range in batch");
    const double lse = log_sum_exp(z);
    if (fine) {
      total += lse - z[s.y];
    } else {
      double mix = 0.0;
      for (int c = 0; c < k; ++c) mix += std::exp(z[c] - lse) * t->at(c, s.y);
      total += -std::log(std::max(mix, kLogFloor));
    }
  }
  return total / static_cast<double>(batch.size());
}

void ClassifierModel::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "weakal-model";
  j["version"] = 1;
  j["dim"] = d_;
  j["hidden"] = h_;
  j["k_fine"] = kf_;
  j["k_weak"] = kw_;
  // Bit-exact round trip: parameters stored as hex of the IEEE-754 pattern.
  std::vector<std::string> words;
  words.reserve(params_.size());
  char buf[24];
  for (double v : params_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
    words.emplace_back(buf);
  }
  j["params_hex"] = words;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file: " + path);
  out << j.dump() << "\n";
}

ClassifierModel ClassifierModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "weakal-model" || j.at("version") != 1)
      throw ParseError("unsupported model file format: " + path);
    ClassifierModel m(j.at("dim").get<int>(), j.at("hidden").get<int>(),
                      j.at("k_fine").get<int>(), j.at("k_weak").get<int>(), 0);
    const auto words = j.at("params_hex").get<std::vector<std::string>>();
    if (words.size() != m.params_.size())
      throw ParseError("model parameter count mismatch in " + path);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::uint64_t bits = std::stoull(words[i], nullptr, 16);
      std::memcpy(&m.params_[i], &bits, sizeof bits);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file " + path + ": " + e.what());
  }
}

bool ClassifierModel::operator==(const ClassifierModel& other) const {
  return d_ == other.d_ && h_ == other.h_ && kf_ == other.kf_ && kw_ == other.kw_ &&
         std::memcmp(params_.data(), other.params_.data(),
                     params_.size() * sizeof(double)) == 0;
}

namespace {

// Standard Adam with bias correction; state is reset at every phase start.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n, const TrainConfig& cfg)
      : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad,
            std::size_t begin = 0) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = begin; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

}  // namespace

ClassifierModel train_model(ClassifierModel model,
                            std::span<const Sample> full_set,
                            std::span<const Sample> weak_set,
                            const TransitionMatrix& t,
                            std::span<const Sample> val_set,
                            const TrainConfig& cfg,
                            TrainHistory* history) {
  cfg.validate();
  TrainHistory local;
  TrainHistory& hist = history != nullptr ? *history : local;
  hist = TrainHistory{};

  std::vector<double> best_params = model.params();
  double best_val = std::numeric_limits<double>::infinity();
  bool have_snapshot = false;

  std::vector<double> grad;
  const auto run_phase = [&](int phase, std::span<const Sample> data, LossKind kind) {
    if (data.empty()) return;
    Rng shuffle_rng(mix_seed(cfg.seed, 0x7a11 + static_cast<std::uint64_t>(phase)));
    AdamOptimizer opt(model.n_params(), cfg);
    const std::size_t frozen =
        (phase == 2 && cfg.freeze_shared_phase2) ? model.shared_param_count() : 0;
    std::vector<int> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    int stale = 0;
    for (int epoch = 0; epoch < cfg.epochs_per_phase; ++epoch) {
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.below(static_cast<std::uint64_t>(i) + 1)]);
      double epoch_loss = 0.0;
      int n_batches = 0;
      std::vector<Sample> batch;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        batch.clear();
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
        const double loss = model.batch_gradients(batch, kind, &t, grad);
        if (!std::isfinite(loss))
          throw TrainError("non-finite loss at phase " + std::to_string(phase) +
                           " epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(n_batches));
        opt.step(model.params(), grad, frozen);
        epoch_loss += loss;
        ++n_batches;
      }
      EpochRecord rec;
      rec.phase = phase;
      rec.epoch = epoch;
      rec.train_loss = epoch_loss / std::max(1, n_batches);
      if (!val_set.empty()) {
        rec.val_loss = model.mean_loss(val_set, LossKind::fine_cross_entropy, nullptr);
        if (rec.val_loss < best_val) {
          best_val = rec.val_loss;
          best_params = model.params();
          have_snapshot = true;
          hist.best_index = static_cast<int>(hist.epochs.size());
          stale = 0;
        } else {
          ++stale;
        }
      }
      hist.epochs.push_back(rec);
      if (cfg.patience > 0 && stale >= cfg.patience) break;
    }
  };

  run_phase(1, weak_set, LossKind::weak_forward_corrected);
  run_phase(2, full_set, LossKind::fine_cross_entropy);

  if (!val_set.empty() && have_snapshot) {
    model.params() = best_params;
    hist.best_val_loss = best_val;
  } else {
    hist.best_index = static_cast<int>(hist.epochs.size()) - 1;
    hist.best_val_loss = hist.epochs.empty() ? 0.0 : hist.epochs.back().val_loss;
  }
  return model;
}

double evaluate_accuracy(const ClassifierModel& model, std::span<const Sample> test_set) {
  if (test_set.empty()) throw DomainError("evaluation set must be non-empty");
  int correct = 0;
  for (const Sample& s : test_set) {
    const auto p = model.forward_fine(s.x);
    int arg = 0;
    for (int c = 1; c < static_cast<int>(p.size()); ++c)
      if (p[c] > p[arg]) arg = c;  // strict > keeps the lowest index on ties
    if (arg == s.y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

double prediction_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace weakal
