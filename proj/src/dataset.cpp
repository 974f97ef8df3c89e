#include "weakal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakal/errors.hpp"
#include "weakal/rng.hpp"

namespace weakal {

Dataset::Dataset(std::vector<Instance> instances, int dim)
    : instances_(std::move(instances)), dim_(dim) {
  if (dim_ <= 0) throw ConfigError("dataset dimension must be positive");
  int max_id = -1;
  for (const auto& inst : instances_) {
    if (inst.id < 0) throw ConfigError("negative instance id");
    max_id = std::max(max_id, inst.id);
    if (static_cast<int>(inst.features.size()) != dim_)
      throw ConfigError("instance " + std::to_string(inst.id) +
                        " has wrong feature dimension");
    for (double v : inst.features)
      if (!std::isfinite(v))
        throw ConfigError("non-finite feature in instance " + std::to_string(inst.id));
  }
  index_of_id_.assign(max_id + 1, -1);
  for (int i = 0; i < size(); ++i) {
    const int id = instances_[i].id;
    if (index_of_id_[id] != -1)
      throw ConfigError("duplicate instance id " + std::to_string(id));
    index_of_id_[id] = i;
  }
}

const Instance& Dataset::instance(int id) const {
  if (!has(id)) throw DomainError("unknown instance id " + std::to_string(id));
  return instances_[index_of_id_[id]];
}

bool Dataset::has(int id) const {
  return id >= 0 && id < static_cast<int>(index_of_id_.size()) && index_of_id_[id] != -1;
}

std::vector<int> Dataset::ids() const {
  std::vector<int> out;
  out.reserve(size());
  for (const auto& inst : instances_) out.push_back(inst.id);
  std::sort(out.begin(), out.end());
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  if (dim_ != other.dim_ || size() != other.size()) return false;
  for (int i = 0; i < size(); ++i) {
    const Instance& a = instances_[i];
    const Instance& b = other.instances_[i];
    if (a.id != b.id || a.true_fine != b.true_fine || a.features != b.features)
      return false;
  }
  return true;
}

void PoolPartition::validate(const Dataset& ds) const {
  std::vector<int> all;
  all.reserve(ds.size());
  for (const auto* set : {&initial, &unlabeled, &validation, &test})
    all.insert(all.end(), set->begin(), set->end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw ConfigError("pool partition sets are not disjoint");
  if (all != ds.ids())
    throw ConfigError("pool partition does not cover the dataset");
}

std::pair<Dataset, LabelSpace> synth_generate(const SynthConfig& cfg) {
  if (cfg.k_weak * cfg.children_per_coarse != cfg.k_fine)
    throw ConfigError("k_weak * children_per_coarse must equal k_fine");
  if (cfg.k_fine <= 0 || cfg.k_weak <= 0 || cfg.dim <= 0 || cfg.per_class <= 0)
    throw ConfigError("synth counts must be positive");
  if (cfg.inter_spread <= 0.0 || cfg.intra_spread <= 0.0)
    throw ConfigError("synth spreads must be positive");
  if (cfg.noise_scale < 0.0) throw ConfigError("noise scale must be nonnegative");

  std::vector<std::string> coarse_names(cfg.k_weak);
  std::vector<std::string> fine_names(cfg.k_fine);
  std::vector<int> parent(cfg.k_fine);
  for (int c = 0; c < cfg.k_weak; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "coarse%03d", c);
    coarse_names[c] = buf;
  }
  for (int f = 0; f < cfg.k_fine; ++f) {
    const int c = f / cfg.children_per_coarse;
    parent[f] = c;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "coarse%03d_fine%03d", c, f);
    fine_names[f] = buf;
  }
  LabelSpace space(std::move(fine_names), std::move(coarse_names), std::move(parent));

  Rng rng(mix_seed(cfg.seed, 0xda7a));
  std::vector<std::vector<double>> coarse_centers(cfg.k_weak, std::vector<double>(cfg.dim));
  for (auto& center : coarse_centers)
    for (double& v : center) v = cfg.inter_spread * rng.normal();

  std::vector<std::vector<double>> fine_centers(cfg.k_fine, std::vector<double>(cfg.dim));
  for (int f = 0; f < cfg.k_fine; ++f) {
    const auto& base = coarse_centers[space.coarsen(f)];
    for (int j = 0; j < cfg.dim; ++j)
      fine_centers[f][j] = base[j] + cfg.intra_spread * rng.normal();
  }

  std::vector<Instance> instances;
  instances.reserve(static_cast<std::size_t>(cfg.k_fine) * cfg.per_class);
  int next_id = 0;
  for (int f = 0; f < cfg.k_fine; ++f) {
    for (int n = 0; n < cfg.per_class; ++n) {
      Instance inst;
      inst.id = next_id++;
      inst.true_fine = f;
      inst.features.resize(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j)
        inst.features[j] = fine_centers[f][j] + cfg.noise_scale * rng.normal();
      instances.push_back(std::move(inst));
    }
  }
  return {Dataset(std::move(instances), cfg.dim), std::move(space)};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset load_features(const std::string& path, const LabelSpace& space) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open feature file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label")
    throw ParseError(path + ":1: header must be 'id,label,<f0>,...'");
  const int dim = static_cast<int>(header.size()) - 2;

  std::vector<Instance> instances;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 2) + " fields, got " +
                       std::to_string(fields.size()));
    Instance inst;
    try {
      std::size_t used = 0;
      inst.id = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": invalid id '" + fields[0] + "'");
    }
    const auto fine = space.fine_index(fields[1]);
    if (!fine)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": unknown fine label '" + fields[1] + "'");
    inst.true_fine = *fine;
    inst.features.resize(dim);
    for (int j = 0; j < dim; ++j) {
      char* end = nullptr;
      const double v = std::strtod(fields[j + 2].c_str(), &end);
      if (end == fields[j + 2].c_str() || *end != '\0' || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": invalid feature value '" + fields[j + 2] + "'");
      inst.features[j] = v;
    }
    instances.push_back(std::move(inst));
  }
  try {
    return Dataset(std::move(instances), dim);
  } catch (const ConfigError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_features(const Dataset& ds, const LabelSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write feature file: " + path);
  out << "id,label";
  for (int j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (const auto& inst : ds.instances()) {
    out << inst.id << "," << space.fine_name(inst.true_fine);
    for (double v : inst.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

PoolPartition split_initial(const Dataset& ds, const LabelSpace& space,
                            int init_per_class, int val_per_class,
                            int test_per_class, std::uint64_t seed) {
  if (init_per_class < 0 || val_per_class < 0 || test_per_class < 0)
    throw ConfigError("per-class split counts must be nonnegative");
  std::vector<std::vector<int>> by_class(space.k_fine());
  for (const auto& inst : ds.instances()) {
    if (inst.true_fine < 0 || inst.true_fine >= space.k_fine())
      throw ConfigError("instance label outside the label space");
    by_class[inst.true_fine].push_back(inst.id);
  }
  const int needed = init_per_class + val_per_class + test_per_class;
  PoolPartition part;
  Rng rng(mix_seed(seed, 0x5b1f));
  for (int f = 0; f < space.k_fine(); ++f) {
    auto& ids = by_class[f];
    std::sort(ids.begin(), ids.end());
    if (static_cast<int>(ids.size()) < needed)
      throw ConfigError("fine class '" + space.fine_name(f) + "' has " +
                        std::to_string(ids.size()) + " instances, needs " +
                        std::to_string(needed));
    // Fisher-Yates on the sorted per-class list.
    for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i)
      std::swap(ids[i], ids[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    int pos = 0;
    for (int n = 0; n < test_per_class; ++n) part.test.push_back(ids[pos++]);
    for (int n = 0; n < val_per_class; ++n) part.validation.push_back(ids[pos++]);
    for (int n = 0; n < init_per_class; ++n) part.initial.push_back(ids[pos++]);
    for (; pos < static_cast<int>(ids.size()); ++pos) part.unlabeled.push_back(ids[pos]);
  }
  for (auto* set : {&part.initial, &part.unlabeled, &part.validation, &part.test})
    std::sort(set->begin(), set->end());
  part.validate(ds);
  return part;
}

}  // namespace weakal
