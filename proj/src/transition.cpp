#include "weakal/transition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakal/errors.hpp"

namespace weakal {

namespace {
constexpr double kLogFloor = 1e-12;
}

TransitionMatrix::TransitionMatrix(int k, std::vector<double> entries)
    : k_(k), entries_(std::move(entries)) {
  if (k_ <= 0) throw ConfigError("transition matrix dimension must be positive");
  if (entries_.size() != static_cast<std::size_t>(k_) * k_)
    throw ConfigError("transition matrix entry count does not match dimension");
  for (int i = 0; i < k_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k_; ++j) {
      const double v = at(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw ConfigError("transition matrix entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") is negative or non-finite");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("transition matrix row " + std::to_string(i) +
                        " sums to " + std::to_string(sum));
    for (int j = 0; j < k_; ++j)
      entries_[static_cast<std::size_t>(i) * k_ + j] /= sum;
  }
}

TransitionMatrix TransitionMatrix::identity(int k) {
  std::vector<double> e(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) e[static_cast<std::size_t>(i) * k + i] = 1.0;
  return TransitionMatrix(k, std::move(e));
}

TransitionMatrix TransitionMatrix::uniform_rows(int k) {
  std::vector<double> e(static_cast<std::size_t>(k) * k, 1.0 / k);
  return TransitionMatrix(k, std::move(e));
}

double TransitionMatrix::mean_diagonal() const {
  double sum = 0.0;
  for (int i = 0; i < k_; ++i) sum += at(i, i);
  return sum / k_;
}

void TransitionMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write transition file: " + path);
  char buf[64];
  for (int i = 0; i < k_; ++i) {
    for (int j = 0; j < k_; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

TransitionMatrix TransitionMatrix::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open transition file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": invalid value '" + field + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  const int k = static_cast<int>(rows.size());
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(rows[i].size()) != k)
      throw ParseError(path + ": row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " +
                       std::to_string(k));
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return TransitionMatrix(k, std::move(flat));
}

TransitionMatrix estimate_transition(const std::vector<TrustedPair>& pairs,
                                     int k_weak, double alpha) {
  if (k_weak < 2) throw ConfigError("transition estimation needs K_w >= 2");
  if (alpha < 0.0) throw ConfigError("smoothing alpha must be nonnegative");
  std::vector<double> counts(static_cast<std::size_t>(k_weak) * k_weak, 0.0);
  std::vector<double> row_total(k_weak, 0.0);
  for (const auto& p : pairs) {
    if (p.abstained) continue;
    if (p.true_coarse < 0 || p.true_coarse >= k_weak ||
        p.vlm_pred < 0 || p.vlm_pred >= k_weak)
      throw DomainError("trusted pair index out of range");
    counts[static_cast<std::size_t>(p.true_coarse) * k_weak + p.vlm_pred] += 1.0;
    row_total[p.true_coarse] += 1.0;
  }
  std::vector<double> entries(static_cast<std::size_t>(k_weak) * k_weak, 0.0);
  for (int i = 0; i < k_weak; ++i) {
    const double denom = row_total[i] + alpha * k_weak;
    if (denom == 0.0) {
      // No observations and no smoothing: identity row.
      entries[static_cast<std::size_t>(i) * k_weak + i] = 1.0;
      continue;
    }
    for (int j = 0; j < k_weak; ++j)
      entries[static_cast<std::size_t>(i) * k_weak + j] =
          (counts[static_cast<std::size_t>(i) * k_weak + j] + alpha) / denom;
  }
  return TransitionMatrix(k_weak, std::move(entries));
}

double forward_corrected_loss(std::span<const double> p_weak,
                              const TransitionMatrix& t, int y_weak) {
  const int k = t.dim();
  if (static_cast<int>(p_weak.size()) != k)
    throw DomainError("probability vector dimension does not match T");
  if (y_weak < 0 || y_weak >= k) throw DomainError("weak label out of range");
  double mass = 0.0;
  for (double v : p_weak) mass += v;
  if (std::abs(mass - 1.0) > 1e-6)
    throw DomainError("probability vector is not normalized (mass " +
                      std::to_string(mass) + ")");
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += p_weak[i] * t.at(i, y_weak);
  return -std::log(std::max(s, kLogFloor));
}

std::vector<double> corrected_loss_gradient(std::span<const double> logits,
                                            const TransitionMatrix& t, int y_weak) {
  const int k = t.dim();
  if (static_cast<int>(logits.size()) != k)
    throw DomainError("logit dimension does not match T");
  if (y_weak < 0 || y_weak >= k) throw DomainError("weak label out of range");
  // Stable softmax.
  std::vector<double> p(k);
  double max_z = logits[0];
  for (double z : logits) max_z = std::max(max_z, z);
  double denom = 0.0;
  for (int i = 0; i < k; ++i) denom += (p[i] = std::exp(logits[i] - max_z));
  for (double& v : p) v /= denom;

  double s = 0.0;
  for (int i = 0; i < k; ++i) s += p[i] * t.at(i, y_weak);
  s = std::max(s, kLogFloor);
  // d/dz_k of -log(sum_i p_i T_iy) = p_k (1 - T_ky / s).
  std::vector<double> grad(k);
  for (int i = 0; i < k; ++i) grad[i] = p[i] * (1.0 - t.at(i, y_weak) / s);
  return grad;
}

}  // namespace weakal
