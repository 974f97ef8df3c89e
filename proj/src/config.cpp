#include "weakal/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakal/errors.hpp"

namespace weakal {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(ctx + ": expected true/false, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": expected integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const unsigned long long r = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": expected unsigned integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& ctx) {
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(ctx + ": expected number, got '" + v + "'");
  return r;
}

Rational parse_rational(const std::string& v, const std::string& ctx) {
  try {
    return Rational::parse(v);
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": expected rational 'p/q', got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

void set_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value, const std::string& ctx) {
  if (section == "experiment") {
    if (key == "rounds") { cfg.rounds = parse_int(value, ctx); return; }
    if (key == "budget") { cfg.budget = parse_rational(value, ctx); return; }
    if (key == "methods") {
      cfg.methods.clear();
      for (const auto& m : split_list(value)) cfg.methods.push_back(method_from_name(m));
      return;
    }
    if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split_list(value)) cfg.seeds.push_back(parse_u64(s, ctx));
      return;
    }
    if (key == "correction_enabled") { cfg.correction_enabled = parse_bool(value, ctx); return; }
    if (key == "reestimate_transition") { cfg.reestimate_each_round = parse_bool(value, ctx); return; }
    if (key == "allow_upgrade") { cfg.allow_upgrade = parse_bool(value, ctx); return; }
    if (key == "warm_start") { cfg.warm_start = parse_bool(value, ctx); return; }
    if (key == "allocator") {
      if (value == "exact") cfg.allocator = AllocatorKind::exact;
      else if (value == "greedy") cfg.allocator = AllocatorKind::greedy;
      else throw ConfigError(ctx + ": allocator must be 'exact' or 'greedy'");
      return;
    }
  } else if (section == "costs") {
    if (key == "c_full") { cfg.costs.c_full = parse_rational(value, ctx); return; }
    if (key == "c_weak") { cfg.costs.c_weak = parse_rational(value, ctx); return; }
  } else if (section == "vlm") {
    if (key == "coarse_accuracy") { cfg.vlm.coarse_accuracy = parse_double(value, ctx); return; }
    if (key == "abstain_prob") { cfg.vlm.abstain_prob = parse_double(value, ctx); return; }
    if (key == "nearest_neighbor_errors") { cfg.vlm.nearest_neighbor_errors = parse_bool(value, ctx); return; }
  } else if (section == "train") {
    if (key == "learning_rate") { cfg.train.learning_rate = parse_double(value, ctx); return; }
    if (key == "epochs_per_phase") { cfg.train.epochs_per_phase = parse_int(value, ctx); return; }
    if (key == "batch_size") { cfg.train.batch_size = parse_int(value, ctx); return; }
    if (key == "beta1") { cfg.train.beta1 = parse_double(value, ctx); return; }
    if (key == "beta2") { cfg.train.beta2 = parse_double(value, ctx); return; }
    if (key == "epsilon") { cfg.train.epsilon = parse_double(value, ctx); return; }
    if (key == "patience") { cfg.train.patience = parse_int(value, ctx); return; }
    if (key == "freeze_shared_phase2") { cfg.train.freeze_shared_phase2 = parse_bool(value, ctx); return; }
    if (key == "hidden_size") { cfg.hidden_size = parse_int(value, ctx); return; }
  } else if (section == "synth") {
    if (key == "k_fine") { cfg.synth.k_fine = parse_int(value, ctx); return; }
    if (key == "k_weak") { cfg.synth.k_weak = parse_int(value, ctx); return; }
    if (key == "children_per_coarse") { cfg.synth.children_per_coarse = parse_int(value, ctx); return; }
    if (key == "dim") { cfg.synth.dim = parse_int(value, ctx); return; }
    if (key == "per_class") { cfg.synth.per_class = parse_int(value, ctx); return; }
    if (key == "inter_spread") { cfg.synth.inter_spread = parse_double(value, ctx); return; }
    if (key == "intra_spread") { cfg.synth.intra_spread = parse_double(value, ctx); return; }
    if (key == "noise_scale") { cfg.synth.noise_scale = parse_double(value, ctx); return; }
    if (key == "seed") { cfg.synth.seed = parse_u64(value, ctx); return; }
  } else if (section == "split") {
    if (key == "init_per_class") { cfg.split.init_per_class = parse_int(value, ctx); return; }
    if (key == "val_per_class") { cfg.split.val_per_class = parse_int(value, ctx); return; }
    if (key == "test_per_class") { cfg.split.test_per_class = parse_int(value, ctx); return; }
  } else if (section == "data") {
    if (key == "features_path") { cfg.features_path = value; return; }
    if (key == "labelspace_path") { cfg.labelspace_path = value; return; }
  } else {
    throw ConfigError(ctx + ": unknown section '" + section + "'");
  }
  throw ConfigError(ctx + ": unknown key '" + section + "." + key + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string ctx = origin + ":" + std::to_string(line_no);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(ctx + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ctx + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    // Quoted values are allowed for rationals and paths.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (section.empty()) throw ConfigError(ctx + ": key outside any section");
    set_key(cfg, section, key, value, ctx + " (" + key + ")");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be section.key=value: '" + assignment + "'");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override key must be section.key: '" + path + "'");
  set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value,
          "override '" + assignment + "'");
  cfg.validate();
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  const auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "[experiment]\n";
  out << "rounds = " << cfg.rounds << "\n";
  out << "budget = " << cfg.budget.str() << "\n";
  out << "methods = ";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    out << (i ? "," : "") << method_name(cfg.methods[i]);
  out << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    out << (i ? "," : "") << cfg.seeds[i];
  out << "\n";
  out << "correction_enabled = " << (cfg.correction_enabled ? "true" : "false") << "\n";
  out << "reestimate_transition = " << (cfg.reestimate_each_round ? "true" : "false") << "\n";
  out << "allow_upgrade = " << (cfg.allow_upgrade ? "true" : "false") << "\n";
  out << "warm_start = " << (cfg.warm_start ? "true" : "false") << "\n";
  out << "allocator = " << (cfg.allocator == AllocatorKind::exact ? "exact" : "greedy") << "\n";
  out << "\n[costs]\n";
  out << "c_full = " << cfg.costs.c_full.str() << "\n";
  out << "c_weak = " << cfg.costs.c_weak.str() << "\n";
  out << "\n[vlm]\n";
  out << "coarse_accuracy = " << num(cfg.vlm.coarse_accuracy) << "\n";
  out << "abstain_prob = " << num(cfg.vlm.abstain_prob) << "\n";
  out << "nearest_neighbor_errors = " << (cfg.vlm.nearest_neighbor_errors ? "true" : "false") << "\n";
  out << "\n[train]\n";
  out << "learning_rate = " << num(cfg.train.learning_rate) << "\n";
  out << "epochs_per_phase = " << cfg.train.epochs_per_phase << "\n";
  out << "batch_size = " << cfg.train.batch_size << "\n";
  out << "beta1 = " << num(cfg.train.beta1) << "\n";
  out << "beta2 = " << num(cfg.train.beta2) << "\n";
  out << "epsilon = " << num(cfg.train.epsilon) << "\n";
  out << "patience = " << cfg.train.patience << "\n";
  out << "freeze_shared_phase2 = " << (cfg.train.freeze_shared_phase2 ? "true" : "false") << "\n";
  out << "hidden_size = " << cfg.hidden_size << "\n";
  out << "\n[synth]\n";
  out << "k_fine = " << cfg.synth.k_fine << "\n";
  out << "k_weak = " << cfg.synth.k_weak << "\n";
  out << "children_per_coarse = " << cfg.synth.children_per_coarse << "\n";
  out << "dim = " << cfg.synth.dim << "\n";
  out << "per_class = " << cfg.synth.per_class << "\n";
  out << "inter_spread = " << num(cfg.synth.inter_spread) << "\n";
  out << "intra_spread = " << num(cfg.synth.intra_spread) << "\n";
  out << "noise_scale = " << num(cfg.synth.noise_scale) << "\n";
  out << "seed = " << cfg.synth.seed << "\n";
  out << "\n[split]\n";
  out << "init_per_class = " << cfg.split.init_per_class << "\n";
  out << "val_per_class = " << cfg.split.val_per_class << "\n";
  out << "test_per_class = " << cfg.split.test_per_class << "\n";
  if (cfg.features_path) {
    out << "\n[data]\n";
    out << "features_path = " << *cfg.features_path << "\n";
    out << "labelspace_path = " << *cfg.labelspace_path << "\n";
  }
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = emit_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace weakal
