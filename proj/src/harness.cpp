#include "weakal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <semaphore>
#include <set>
#include <thread>

#include "weakal/errors.hpp"
#include "weakal/rng.hpp"

namespace weakal {

std::string method_name(Method m) {
  switch (m) {
    case Method::random_full: return "random-full";
    case Method::entropy_full: return "entropy-full";
    case Method::badge_full: return "badge-full";
    case Method::mixed_allocated: return "mixed-allocated";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "random-full") return Method::random_full;
  if (name == "entropy-full") return Method::entropy_full;
  if (name == "badge-full") return Method::badge_full;
  if (name == "mixed-allocated") return Method::mixed_allocated;
  throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(budget > Rational(0))) throw ConfigError("budget must be positive");
  costs.validate();
  if (methods.empty()) throw ConfigError("at least one method required");
  if (seeds.empty()) throw ConfigError("at least one seed required");
  if (vlm.coarse_accuracy < 0.0 || vlm.coarse_accuracy > 1.0)
    throw ConfigError("vlm coarse_accuracy must be in [0, 1]");
  if (vlm.abstain_prob < 0.0 || vlm.abstain_prob > 1.0)
    throw ConfigError("vlm abstain_prob must be in [0, 1]");
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (split.init_per_class < 0 || split.val_per_class < 0 || split.test_per_class < 0)
    throw ConfigError("split counts must be nonnegative");
  if (features_path.has_value() != labelspace_path.has_value())
    throw ConfigError("features_path and labelspace_path must be set together");
  train.validate();
}

void BudgetLedger::charge(const AnnotationRecord& rec) {
  charges_.push_back(rec.cost_charged);
  total_ += rec.cost_charged;
  by_source_[static_cast<int>(rec.source)] += rec.cost_charged;
}

const Rational& BudgetLedger::total_for(Source s) const {
  return by_source_[static_cast<int>(s)];
}

namespace {

struct ReplicateState {
  std::vector<int> pool;                   // current D_u, sorted
  std::map<int, AnnotationRecord> full_records;  // id -> human record
  std::map<int, AnnotationRecord> weak_records;  // id -> labeled weak record
  std::vector<TrustedPair> trusted_pairs;
  BudgetLedger ledger;
};

std::vector<Sample> make_fine_samples(const Dataset& ds, const std::vector<int>& ids) {
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const Instance& inst = ds.instance(id);
    out.push_back({inst.features, inst.true_fine});
  }
  return out;
}

void erase_id(std::vector<int>& sorted_ids, int id) {
  const auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  if (it != sorted_ids.end() && *it == id) sorted_ids.erase(it);
}

ClassifierModel retrain(const ExperimentConfig& cfg, const Dataset& ds,
                        const LabelSpace& space, const ReplicateState& state,
                        const std::vector<Sample>& val_samples,
                        const TransitionMatrix& t_est, std::uint64_t seed, int round,
                        const ClassifierModel* warm_from) {
  std::vector<Sample> full_samples, weak_samples;
  full_samples.reserve(state.full_records.size());
  for (const auto& [id, rec] : state.full_records)
    full_samples.push_back({ds.instance(id).features, *rec.label});
  weak_samples.reserve(state.weak_records.size());
  for (const auto& [id, rec] : state.weak_records)
    weak_samples.push_back({ds.instance(id).features, *rec.label});

  ClassifierModel model =
      (cfg.warm_start && warm_from != nullptr)
          ? *warm_from
          : ClassifierModel(ds.dim(), cfg.hidden_size, space.k_fine(), space.k_coarse(),
                            mix_seed(mix_seed(seed, 2), static_cast<std::uint64_t>(round)));
  // With correction disabled, phase 1 reduces to plain weak cross-entropy.
  const TransitionMatrix train_t =
      cfg.correction_enabled ? t_est : TransitionMatrix::identity(space.k_coarse());
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = mix_seed(mix_seed(seed, 5), static_cast<std::uint64_t>(round));
  return train_model(std::move(model), full_samples, weak_samples, train_t,
                     val_samples, train_cfg);
}

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& cfg, Method method,
                              const Dataset& ds, const LabelSpace& space,
                              std::uint64_t seed) {
  cfg.validate();
  const PoolPartition part =
      split_initial(ds, space, cfg.split.init_per_class, cfg.split.val_per_class,
                    cfg.split.test_per_class, mix_seed(seed, 1));

  // The annotator owns the generator transition; nearest-neighbor error
  // structure uses true class centers (annotator-side knowledge).
  TransitionMatrix true_t = TransitionMatrix::identity(space.k_coarse());
  if (cfg.vlm.nearest_neighbor_errors) {
    const auto centers = coarse_class_centers(ds, space);
    true_t = make_calibrated_transition(space.k_coarse(), cfg.vlm.coarse_accuracy, &centers);
  } else {
    true_t = make_calibrated_transition(space.k_coarse(), cfg.vlm.coarse_accuracy, nullptr);
  }
  VlmSimulator purchase_vlm({true_t, cfg.vlm.abstain_prob, mix_seed(seed, 3)});
  VlmSimulator probe_vlm({true_t, cfg.vlm.abstain_prob, mix_seed(seed, 4)});

  ReplicateState state;
  state.pool = part.unlabeled;
  // D_I arrives fully labeled and is not charged to the budget; the trusted
  // pairs for transition estimation come from probing the weak annotator on
  // these same instances.
  for (int id : part.initial) {
    AnnotationRecord rec = human_annotate(ds.instance(id), cfg.costs);
    state.trusted_pairs.push_back(probe_vlm.zero_shot(ds.instance(id), space));
    state.full_records.emplace(id, std::move(rec));
  }

  const double alpha = 1.0;  // add-one smoothing
  TransitionMatrix t_est =
      estimate_transition(state.trusted_pairs, space.k_coarse(), alpha);
  const TransitionMatrix t_round0 = t_est;

  const std::vector<Sample> val_samples = make_fine_samples(ds, part.validation);
  const std::vector<Sample> test_samples = make_fine_samples(ds, part.test);
  const FeatureView view(ds);

  ReplicateResult result;
  result.method = method;
  result.seed = seed;

  ClassifierModel model = retrain(cfg, ds, space, state, val_samples, t_est, seed, 0, nullptr);
  result.initial_accuracy = evaluate_accuracy(model, test_samples);

  for (int round = 1; round <= cfg.rounds; ++round) {
    const std::uint64_t round_seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(round));
    AllocationPlan plan;

    if (method == Method::mixed_allocated) {
      std::vector<ScoredCandidate> scored =
          score_candidates(model, t_est, space, view, state.pool);
      if (cfg.allow_upgrade) {
        for (const auto& [id, rec] : state.weak_records) {
          ScoredCandidate c;
          c.id = id;
          c.v_full = prediction_entropy(model.forward_fine(view.features(id)));
          c.v_weak = 0.0;
          c.full_only = true;
          scored.push_back(c);
        }
      }
      plan = cfg.allocator == AllocatorKind::exact
                 ? allocate_exact(scored, cfg.costs, cfg.budget)
                 : allocate_greedy(scored, cfg.costs, cfg.budget);
    } else {
      const long k_budget = (cfg.budget / cfg.costs.c_full).floor();
      const int k = static_cast<int>(
          std::min<long>(k_budget, static_cast<long>(state.pool.size())));
      std::vector<int> ids;
      switch (method) {
        case Method::random_full:
          ids = select_random(state.pool, k, round_seed);
          break;
        case Method::entropy_full:
          ids = select_entropy(model, view, state.pool, k);
          break;
        case Method::badge_full:
          ids = select_badge(model, view, state.pool, k, round_seed);
          break;
        default:
          break;
      }
      std::sort(ids.begin(), ids.end());
      plan.full_ids = ids;
      for (int id : ids) {
        plan.planned_cost += cfg.costs.c_full;
        plan.actions.push_back({id, Granularity::full, 0.0});
      }
    }

    RoundReport report;
    report.round = round;
    report.empty_plan = plan.full_ids.empty() && plan.weak_ids.empty();
    report.plan = plan;

    for (int id : plan.full_ids) {
      AnnotationRecord rec = human_annotate(ds.instance(id), cfg.costs);
      state.ledger.charge(rec);
      report.cost_spent += rec.cost_charged;
      ++report.full_purchased;
      // An upgrade replaces the weak record; a fresh full label also yields a
      // trusted pair for transition estimation.
      state.weak_records.erase(id);
      erase_id(state.pool, id);
      state.trusted_pairs.push_back(probe_vlm.zero_shot(ds.instance(id), space));
      state.full_records.emplace(id, std::move(rec));
    }
    for (int id : plan.weak_ids) {
      AnnotationRecord rec = purchase_vlm.annotate(ds.instance(id), space, cfg.costs);
      state.ledger.charge(rec);
      report.cost_spent += rec.cost_charged;
      if (rec.abstained) {
        ++report.abstained;  // charged, id stays in the pool
      } else {
        ++report.weak_purchased;
        erase_id(state.pool, id);
        state.weak_records.emplace(id, std::move(rec));
      }
    }

    if (cfg.reestimate_each_round) {
      t_est = estimate_transition(state.trusted_pairs, space.k_coarse(), alpha);
    } else {
      t_est = t_round0;
    }

    model = retrain(cfg, ds, space, state, val_samples, t_est, seed, round, &model);
    report.test_accuracy = evaluate_accuracy(model, test_samples);
    report.full_count = static_cast<long>(state.full_records.size());
    report.weak_count = (result.rounds.empty() ? 0 : result.rounds.back().weak_count) +
                        report.weak_purchased;
    report.weak_active = static_cast<long>(state.weak_records.size());
    report.transition_mean_diag = t_est.mean_diagonal();
    result.rounds.push_back(std::move(report));
  }

  result.final_transition = t_est;
  return result;
}

namespace {

int parallel_cap(std::size_t n_tasks) {
  long cap = static_cast<long>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("WEAKAL_MAX_PARALLEL")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = v;
  }
  return static_cast<int>(std::min<long>(cap, static_cast<long>(n_tasks)));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& ds,
                                const LabelSpace& space) {
  cfg.validate();
  ExperimentResult result;
  struct Task {
    Method method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : cfg.methods)
    for (std::uint64_t s : cfg.seeds) tasks.push_back({m, s});

  const int cap = parallel_cap(tasks.size());
  std::counting_semaphore<256> gate(cap);
  std::vector<std::future<ReplicateResult>> futures;
  futures.reserve(tasks.size());
  for (const Task& task : tasks) {
    futures.push_back(std::async(std::launch::async, [&cfg, &ds, &space, task, &gate] {
      gate.acquire();
      try {
        ReplicateResult r = run_replicate(cfg, task.method, ds, space, task.seed);
        gate.release();
        return r;
      } catch (const std::exception& e) {
        gate.release();
        throw std::runtime_error("seed " + std::to_string(task.seed) + " (" +
                                 method_name(task.method) + "): " + e.what());
      }
    }));
  }
  result.replicates.reserve(tasks.size());
  for (auto& f : futures) result.replicates.push_back(f.get());

  // Per-round sample mean / sample standard deviation over seeds.
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (int round = 1; round <= cfg.rounds; ++round) {
      double mean = 0.0;
      for (int si = 0; si < n_seeds; ++si)
        mean += result.replicates[mi * n_seeds + si].rounds[round - 1].test_accuracy;
      mean /= n_seeds;
      double var = 0.0;
      for (int si = 0; si < n_seeds; ++si) {
        const double d =
            result.replicates[mi * n_seeds + si].rounds[round - 1].test_accuracy - mean;
        var += d * d;
      }
      AggregateRow row;
      row.method = cfg.methods[mi];
      row.round = round;
      row.mean_accuracy = mean;
      row.std_accuracy = n_seeds > 1 ? std::sqrt(var / (n_seeds - 1)) : 0.0;
      result.aggregate.push_back(row);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.features_path) {
    const LabelSpace space = LabelSpace::load_json(*cfg.labelspace_path);
    const Dataset ds = load_features(*cfg.features_path, space);
    return run_experiment(cfg, ds, space);
  }
  auto [ds, space] = synth_generate(cfg.synth);
  return run_experiment(cfg, ds, space);
}

std::vector<std::pair<Rational, ExperimentResult>> sweep_weak_cost(
    const ExperimentConfig& cfg, const std::vector<Rational>& c_weak_values) {
  if (c_weak_values.empty()) throw ConfigError("sweep needs at least one cost value");
  std::vector<std::pair<Rational, ExperimentResult>> out;
  for (const Rational& c : c_weak_values) {
    if (!(c > Rational(0))) throw ConfigError("weak cost values must be positive");
    ExperimentConfig variant = cfg;
    variant.costs.c_weak = c;
    out.emplace_back(c, run_experiment(variant));
  }
  return out;
}

std::vector<RatioRow> label_ratio_series(const ExperimentResult& result) {
  if (result.replicates.empty()) throw DomainError("no replicates to report");
  std::vector<RatioRow> rows;
  for (const auto& rep : result.replicates) {
    for (const auto& round : rep.rounds) {
      RatioRow row;
      row.method = rep.method;
      row.seed = rep.seed;
      row.round = round.round;
      const double denom = static_cast<double>(round.full_count + round.weak_active);
      row.full_fraction = denom > 0 ? round.full_count / denom : 0.0;
      row.weak_fraction = denom > 0 ? round.weak_active / denom : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_metrics_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "method,seed,round,accuracy,full_count,weak_count,cost_spent_num,cost_spent_den\n";
  char buf[64];
  for (const auto& rep : result.replicates) {
    for (const auto& round : rep.rounds) {
      std::snprintf(buf, sizeof(buf), "%.17g", round.test_accuracy);
      out << method_name(rep.method) << "," << rep.seed << "," << round.round << ","
          << buf << "," << round.full_count << "," << round.weak_count << ","
          << round.cost_spent.num() << "," << round.cost_spent.den() << "\n";
    }
  }
}

void write_aggregate_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "method,round,mean_acc,std_acc\n";
  char buf1[64], buf2[64];
  for (const auto& row : result.aggregate) {
    std::snprintf(buf1, sizeof(buf1), "%.17g", row.mean_accuracy);
    std::snprintf(buf2, sizeof(buf2), "%.17g", row.std_accuracy);
    out << method_name(row.method) << "," << row.round << "," << buf1 << "," << buf2 << "\n";
  }
}

void write_ratios_csv(const std::vector<RatioRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "method,seed,round,full_fraction,weak_fraction\n";
  char buf1[64], buf2[64];
  for (const auto& row : rows) {
    std::snprintf(buf1, sizeof(buf1), "%.17g", row.full_fraction);
    std::snprintf(buf2, sizeof(buf2), "%.17g", row.weak_fraction);
    out << method_name(row.method) << "," << row.seed << "," << row.round << ","
        << buf1 << "," << buf2 << "\n";
  }
}

}  // namespace weakal
