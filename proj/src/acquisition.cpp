#include "weakal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "weakal/errors.hpp"
#include "weakal/rng.hpp"

namespace weakal {

std::vector<int> select_random(const std::vector<int>& pool, int k, std::uint64_t seed) {
  if (k < 0 || k > static_cast<int>(pool.size()))
    throw DomainError("select_random: k out of range");
  std::vector<int> ids = pool;
  Rng rng(mix_seed(seed, 0xac41));
  // Partial Fisher-Yates: the first k slots are the sample.
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return ids;
}

std::vector<int> select_entropy(const ClassifierModel& model, const FeatureView& view,
                                const std::vector<int>& pool, int k) {
  if (k < 0 || k > static_cast<int>(pool.size()))
    throw DomainError("select_entropy: k out of range");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(pool.size());
  for (int id : pool)
    scored.emplace_back(prediction_entropy(model.forward_fine(view.features(id))), id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<int> select_badge(const ClassifierModel& model, const FeatureView& view,
                              const std::vector<int>& pool, int k, std::uint64_t seed) {
  if (k < 0 || k > static_cast<int>(pool.size()))
    throw DomainError("select_badge: k out of range");
  if (k == 0) return {};
  const int n = static_cast<int>(pool.size());

  // g(x) = (p - onehot(argmax p)) (x) hidden(x). The outer product is never
  // materialized: norms and dot products factor over the two parts.
  std::vector<std::vector<double>> us(n), hs(n);
  std::vector<double> u_sq(n), h_sq(n);
  for (int i = 0; i < n; ++i) {
    hs[i] = model.hidden_activations(view.features(pool[i]));
    us[i] = model.forward_fine(view.features(pool[i]));
    int arg = 0;
    for (int c = 1; c < static_cast<int>(us[i].size()); ++c)
      if (us[i][c] > us[i][arg]) arg = c;
    us[i][arg] -= 1.0;
    double su = 0.0, sh = 0.0;
    for (double v : us[i]) su += v * v;
    for (double v : hs[i]) sh += v * v;
    u_sq[i] = su;
    h_sq[i] = sh;
  }
  const auto sq_dist = [&](int a, int b) {
    double du = 0.0, dh = 0.0;
    for (std::size_t t = 0; t < us[a].size(); ++t) du += us[a][t] * us[b][t];
    for (std::size_t t = 0; t < hs[a].size(); ++t) dh += hs[a][t] * hs[b][t];
    const double d = u_sq[a] * h_sq[a] + u_sq[b] * h_sq[b] - 2.0 * du * dh;
    return d > 0.0 ? d : 0.0;
  };

  // First center: max embedding norm, ties by lower id.
  int first = 0;
  for (int i = 1; i < n; ++i) {
    const double ni = u_sq[i] * h_sq[i], nf = u_sq[first] * h_sq[first];
    if (ni > nf || (ni == nf && pool[i] < pool[first])) first = i;
  }
  std::vector<int> chosen{first};
  std::vector<bool> taken(n, false);
  taken[first] = true;
  std::vector<double> min_d2(n);
  for (int i = 0; i < n; ++i) min_d2[i] = taken[i] ? 0.0 : sq_dist(i, first);

  Rng rng(mix_seed(seed, 0xbad6e));
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (!taken[i]) total += min_d2[i];
    int pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (taken[i]) continue;
        cum += min_d2[i];
        if (r < cum) { pick = i; break; }
      }
      if (pick == -1) {  // r landed on the tail of the rounding error
        for (int i = n - 1; i >= 0; --i)
          if (!taken[i] && min_d2[i] > 0.0) { pick = i; break; }
      }
    }
    if (pick == -1) {  // all remaining embeddings coincide with a center
      for (int i = 0; i < n; ++i)
        if (!taken[i]) { pick = i; break; }
    }
    taken[pick] = true;
    chosen.push_back(pick);
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double d = sq_dist(i, pick);
      if (d < min_d2[i]) min_d2[i] = d;
    }
  }
  std::vector<int> out;
  out.reserve(k);
  for (int i : chosen) out.push_back(pool[i]);
  return out;
}

std::vector<ScoredCandidate> score_candidates(const ClassifierModel& model,
                                              const TransitionMatrix& t,
                                              const LabelSpace& space,
                                              const FeatureView& view,
                                              const std::vector<int>& pool) {
  if (t.dim() != space.k_coarse())
    throw ConfigError("transition dimension does not match label space");
  if (model.k_fine() != space.k_fine() || model.k_weak() != space.k_coarse())
    throw ConfigError("model heads do not match label space");
  const double rho = t.mean_diagonal();
  std::vector<ScoredCandidate> out;
  out.reserve(pool.size());
  std::vector<double> q(space.k_coarse());
  for (int id : pool) {
    const auto p = model.forward_fine(view.features(id));
    std::fill(q.begin(), q.end(), 0.0);
    for (int f = 0; f < space.k_fine(); ++f) q[space.coarsen(f)] += p[f];
    ScoredCandidate c;
    c.id = id;
    c.v_full = prediction_entropy(p);
    c.v_weak = rho * prediction_entropy(q);
    out.push_back(c);
  }
  return out;
}

double AllocationPlan::total_utility(const std::vector<ScoredCandidate>& scored) const {
  double total = 0.0;
  for (const auto& c : scored) {
    if (std::find(full_ids.begin(), full_ids.end(), c.id) != full_ids.end())
      total += c.v_full;
    else if (std::find(weak_ids.begin(), weak_ids.end(), c.id) != weak_ids.end())
      total += c.v_weak;
  }
  return total;
}

namespace {

struct Action {
  int id;
  Granularity granularity;
  double utility;
  double ratio;
};

std::vector<Action> build_actions(const std::vector<ScoredCandidate>& scored,
                                  const CostSchedule& sched) {
  std::vector<Action> actions;
  actions.reserve(scored.size() * 2);
  for (const auto& c : scored) {
    if (c.v_weak > c.v_full)
      throw DomainError("candidate " + std::to_string(c.id) +
                        " has weak utility above full utility");
    actions.push_back({c.id, Granularity::full, c.v_full,
                       c.v_full / sched.c_full.to_double()});
    if (!c.full_only)
      actions.push_back({c.id, Granularity::weak, c.v_weak,
                         c.v_weak / sched.c_weak.to_double()});
  }
  std::sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.granularity != b.granularity) return a.granularity == Granularity::full;
    return a.id < b.id;
  });
  return actions;
}

// Sweep the sorted action list once, honoring the remaining budget and the
// one-action-per-instance rule. Used both as the greedy allocator and as the
// maximality fill pass after the exact solve.
void sweep_fill(const std::vector<Action>& actions, const CostSchedule& sched,
                const Rational& budget, AllocationPlan& plan,
                std::vector<int>& taken_ids) {
  Rational remaining = budget - plan.planned_cost;
  for (const Action& a : actions) {
    if (std::find(taken_ids.begin(), taken_ids.end(), a.id) != taken_ids.end())
      continue;
    const Rational& cost = a.granularity == Granularity::full ? sched.c_full : sched.c_weak;
    if (cost > remaining) continue;
    remaining -= cost;
    plan.planned_cost += cost;
    taken_ids.push_back(a.id);
    (a.granularity == Granularity::full ? plan.full_ids : plan.weak_ids).push_back(a.id);
    plan.actions.push_back({a.id, a.granularity, a.ratio});
  }
}

}  // namespace

AllocationPlan allocate_greedy(const std::vector<ScoredCandidate>& scored,
                               const CostSchedule& sched, const Rational& budget) {
  sched.validate();
  if (budget < Rational(0)) throw DomainError("budget must be nonnegative");
  AllocationPlan plan;
  std::vector<int> taken;
  sweep_fill(build_actions(scored, sched), sched, budget, plan, taken);
  std::sort(plan.full_ids.begin(), plan.full_ids.end());
  std::sort(plan.weak_ids.begin(), plan.weak_ids.end());
  return plan;
}

AllocationPlan allocate_exact(const std::vector<ScoredCandidate>& scored,
                              const CostSchedule& sched, const Rational& budget) {
  sched.validate();
  if (budget < Rational(0)) throw DomainError("budget must be nonnegative");

  // Budget unit: the rational gcd of the two costs. All action costs are
  // integer multiples of it, so a unit-indexed dynamic program is exact.
  const auto rational_gcd = [](const Rational& a, const Rational& b) {
    const std::int64_t num = std::gcd(a.num() * b.den(), b.num() * a.den());
    return Rational(num, a.den() * b.den());
  };
  const Rational unit = rational_gcd(sched.c_full, sched.c_weak);
  const std::int64_t capacity = (budget / unit).floor();
  const std::int64_t uf = (sched.c_full / unit).floor();
  const std::int64_t uw = (sched.c_weak / unit).floor();
  const std::size_t n = scored.size();

  constexpr std::int64_t kMaxCells = 400000000;
  if (capacity < 0 || capacity > 4000000 ||
      static_cast<std::int64_t>(n) * (capacity + 1) > kMaxCells)
    return allocate_greedy(scored, sched, budget);

  const std::size_t width = static_cast<std::size_t>(capacity) + 1;
  std::vector<double> dp(width, 0.0), next(width, 0.0);
  // 2 bits per (candidate, units) cell: 0 none, 1 weak, 2 full.
  std::vector<std::uint8_t> choice((n * width + 3) / 4, 0);
  const auto set_choice = [&](std::size_t i, std::size_t u, std::uint8_t c) {
    const std::size_t cell = i * width + u;
    choice[cell >> 2] |= static_cast<std::uint8_t>(c << ((cell & 3) * 2));
  };
  const auto get_choice = [&](std::size_t i, std::size_t u) -> std::uint8_t {
    const std::size_t cell = i * width + u;
    return (choice[cell >> 2] >> ((cell & 3) * 2)) & 3;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const ScoredCandidate& c = scored[i];
    for (std::size_t u = 0; u < width; ++u) {
      double best = dp[u];
      std::uint8_t pick = 0;
      if (!c.full_only && static_cast<std::int64_t>(u) >= uw) {
        const double v = dp[u - uw] + c.v_weak;
        if (v > best) { best = v; pick = 1; }
      }
      if (static_cast<std::int64_t>(u) >= uf) {
        const double v = dp[u - uf] + c.v_full;
        if (v > best) { best = v; pick = 2; }
      }
      next[u] = best;
      if (pick != 0) set_choice(i, u, pick);
    }
    std::swap(dp, next);
  }

  AllocationPlan plan;
  std::vector<int> taken;
  std::vector<std::pair<std::size_t, std::uint8_t>> picks;
  std::size_t u = static_cast<std::size_t>(capacity);
  for (std::size_t i = n; i-- > 0;) {
    const std::uint8_t c = get_choice(i, u);
    if (c == 1) { picks.emplace_back(i, c); u -= static_cast<std::size_t>(uw); }
    else if (c == 2) { picks.emplace_back(i, c); u -= static_cast<std::size_t>(uf); }
  }
  std::reverse(picks.begin(), picks.end());
  for (const auto& [i, c] : picks) {
    const ScoredCandidate& cand = scored[i];
    taken.push_back(cand.id);
    if (c == 2) {
      plan.full_ids.push_back(cand.id);
      plan.planned_cost += sched.c_full;
      plan.actions.push_back({cand.id, Granularity::full,
                              cand.v_full / sched.c_full.to_double()});
    } else {
      plan.weak_ids.push_back(cand.id);
      plan.planned_cost += sched.c_weak;
      plan.actions.push_back({cand.id, Granularity::weak,
                              cand.v_weak / sched.c_weak.to_double()});
    }
  }

  // The DP never spends budget on zero-utility actions; take them now so no
  // affordable action remains.
  sweep_fill(build_actions(scored, sched), sched, budget, plan, taken);
  std::sort(plan.full_ids.begin(), plan.full_ids.end());
  std::sort(plan.weak_ids.begin(), plan.weak_ids.end());
  return plan;
}

AllocationPlan allocate(const std::vector<ScoredCandidate>& scored,
                        const CostSchedule& sched, const Rational& budget) {
  return allocate_exact(scored, sched, budget);
}

void write_plan_jsonl(const AllocationPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write plan file: " + path);
  for (const auto& a : plan.actions) {
    nlohmann::json j;
    j["id"] = a.id;
    j["action"] = a.granularity == Granularity::full ? "full" : "weak";
    j["ratio"] = a.ratio;
    out << j.dump() << "\n";
  }
}

}  // namespace weakal
