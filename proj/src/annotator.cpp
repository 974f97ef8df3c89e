#include "weakal/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "weakal/errors.hpp"

namespace weakal {

void CostSchedule::validate() const {
  const Rational zero(0);
  if (!(c_full > zero) || !(c_weak > zero))
    throw ConfigError("annotation costs must be positive");
  if (c_weak > c_full)
    throw ConfigError("weak cost must not exceed full cost");
}

AnnotationRecord human_annotate(const Instance& inst, const CostSchedule& sched) {
  sched.validate();
  AnnotationRecord rec;
  rec.instance_id = inst.id;
  rec.source = Source::human;
  rec.granularity = Granularity::full;
  rec.label = inst.true_fine;
  rec.cost_charged = sched.c_full;
  rec.abstained = false;
  return rec;
}

VlmSimulator::VlmSimulator(VlmSimConfig cfg)
    : cfg_(std::move(cfg)), rng_(mix_seed(cfg_.seed, 0x5e1f)) {
  if (cfg_.abstain_prob < 0.0 || cfg_.abstain_prob > 1.0)
    throw ConfigError("abstain probability must be in [0, 1]");
}

int VlmSimulator::draw(int true_coarse) {
  if (cfg_.abstain_prob > 0.0 && rng_.uniform() < cfg_.abstain_prob) return -1;
  const double u = rng_.uniform();
  const auto row = cfg_.true_transition.row(true_coarse);
  double cum = 0.0;
  for (int j = 0; j < cfg_.true_transition.dim(); ++j) {
    cum += row[j];
    if (u < cum) return j;
  }
  return cfg_.true_transition.dim() - 1;
}

AnnotationRecord VlmSimulator::annotate(const Instance& inst, const LabelSpace& space,
                                        const CostSchedule& sched) {
  sched.validate();
  if (cfg_.true_transition.dim() != space.k_coarse())
    throw ConfigError("transition dimension does not match label space");
  AnnotationRecord rec;
  rec.instance_id = inst.id;
  rec.source = Source::vlm;
  rec.granularity = Granularity::weak;
  rec.cost_charged = sched.c_weak;
  const int label = draw(space.coarsen(inst.true_fine));
  if (label < 0) {
    rec.abstained = true;
  } else {
    rec.label = label;
  }
  return rec;
}

TrustedPair VlmSimulator::zero_shot(const Instance& inst, const LabelSpace& space) {
  if (cfg_.true_transition.dim() != space.k_coarse())
    throw ConfigError("transition dimension does not match label space");
  TrustedPair pair;
  pair.true_coarse = space.coarsen(inst.true_fine);
  const int label = draw(pair.true_coarse);
  if (label < 0) {
    pair.abstained = true;
  } else {
    pair.vlm_pred = label;
  }
  return pair;
}

TransitionMatrix make_calibrated_transition(
    int k_weak, double diag_accuracy,
    const std::vector<std::vector<double>>* coarse_centers) {
  if (k_weak < 1) throw ConfigError("K_w must be positive");
  if (diag_accuracy < 0.0 || diag_accuracy > 1.0)
    throw ConfigError("diagonal accuracy must be in [0, 1]");
  if (k_weak == 1) return TransitionMatrix::identity(1);
  const double off_mass = 1.0 - diag_accuracy;
  std::vector<double> entries(static_cast<std::size_t>(k_weak) * k_weak, 0.0);
  for (int i = 0; i < k_weak; ++i) {
    entries[static_cast<std::size_t>(i) * k_weak + i] = diag_accuracy;
    std::vector<int> targets;
    if (coarse_centers != nullptr) {
      if (static_cast<int>(coarse_centers->size()) != k_weak)
        throw ConfigError("coarse center count does not match K_w");
      // Nearest 3 other classes by center distance; ties by lower index.
      std::vector<std::pair<double, int>> dist;
      for (int j = 0; j < k_weak; ++j) {
        if (j == i) continue;
        double d2 = 0.0;
        for (std::size_t t = 0; t < (*coarse_centers)[i].size(); ++t) {
          const double d = (*coarse_centers)[i][t] - (*coarse_centers)[j][t];
          d2 += d * d;
        }
        dist.emplace_back(d2, j);
      }
      std::sort(dist.begin(), dist.end());
      const int n = std::min<int>(3, static_cast<int>(dist.size()));
      for (int t = 0; t < n; ++t) targets.push_back(dist[t].second);
    } else {
      for (int j = 0; j < k_weak; ++j)
        if (j != i) targets.push_back(j);
    }
    for (int j : targets)
      entries[static_cast<std::size_t>(i) * k_weak + j] = off_mass / targets.size();
  }
  return TransitionMatrix(k_weak, std::move(entries));
}

std::vector<std::vector<double>> coarse_class_centers(const Dataset& ds,
                                                      const LabelSpace& space) {
  std::vector<std::vector<double>> centers(space.k_coarse(),
                                           std::vector<double>(ds.dim(), 0.0));
  std::vector<int> counts(space.k_coarse(), 0);
  for (const auto& inst : ds.instances()) {
    const int c = space.coarsen(inst.true_fine);
    ++counts[c];
    for (int j = 0; j < ds.dim(); ++j) centers[c][j] += inst.features[j];
  }
  for (int c = 0; c < space.k_coarse(); ++c) {
    if (counts[c] == 0) continue;
    for (double& v : centers[c]) v /= counts[c];
  }
  return centers;
}

void write_annotation_requests(const std::string& path, const std::vector<int>& ids,
                               const LabelSpace& space, const std::string& hint) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write request file: " + path);
  for (int id : ids) {
    nlohmann::json j;
    j["id"] = id;
    j["candidates"] = space.coarse_names();
    if (!hint.empty()) j["hint"] = hint;
    out << j.dump() << "\n";
  }
}

std::vector<AnnotationRecord> external_annotate_batch(const std::string& request_path,
                                                      const std::string& response_path,
                                                      const LabelSpace& space,
                                                      const CostSchedule& sched) {
  sched.validate();
  std::ifstream req(request_path);
  if (!req) throw ParseError("cannot open request file: " + request_path);
  std::vector<int> request_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(req, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      request_ids.push_back(nlohmann::json::parse(line).at("id").get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(request_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::ifstream resp(response_path);
  if (!resp) throw ParseError("cannot open response file: " + response_path);
  std::map<int, std::string> responses;
  line_no = 0;
  while (std::getline(resp, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      responses[j.at("id").get<int>()] = j.at("label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(response_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::vector<int> missing;
  for (int id : request_ids)
    if (!responses.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "missing response ids:";
    for (int id : missing) msg << " " << id;
    throw ProtocolError(msg.str());
  }

  std::vector<AnnotationRecord> records;
  records.reserve(request_ids.size());
  for (int id : request_ids) {
    AnnotationRecord rec;
    rec.instance_id = id;
    rec.source = Source::external;
    rec.granularity = Granularity::weak;
    rec.cost_charged = sched.c_weak;
    // Labels outside the candidate set count as invalid responses.
    const auto coarse = space.coarse_index(responses.at(id));
    if (coarse) {
      rec.label = *coarse;
    } else {
      rec.abstained = true;
    }
    records.push_back(rec);
  }
  return records;
}

}  // namespace weakal
