#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "weakal/chart.hpp"
#include "weakal/config.hpp"
#include "weakal/errors.hpp"

using namespace weakal;

namespace {

std::string tmp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("config text parsing with defaults") {
  const ExperimentConfig cfg = parse_config_text("", "inline");
  CHECK(cfg.rounds == 5);
  CHECK(cfg.budget == Rational(150));
  CHECK(cfg.costs.c_full == Rational(1));
  CHECK(cfg.costs.c_weak == Rational(1, 50));
  CHECK(cfg.methods == std::vector<Method>{Method::mixed_allocated});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.correction_enabled);
  CHECK(cfg.allocator == AllocatorKind::exact);
  CHECK(cfg.train.epochs_per_phase == 50);
  CHECK(cfg.split.init_per_class == 3);
  CHECK(cfg.split.val_per_class == 2);
}

TEST_CASE("config parsing reads every section") {
  const char* text = R"(
# experiment setup
[experiment]
rounds = 3
budget = 20
methods = entropy-full, mixed-allocated
seeds = 7, 8
correction_enabled = false
allocator = greedy

[costs]
c_full = 2
c_weak = 1/10

[vlm]
coarse_accuracy = 0.7
abstain_prob = 0.05

[train]
learning_rate = 0.01
epochs_per_phase = 12
hidden_size = 24

[synth]
k_fine = 8
k_weak = 4
children_per_coarse = 2
dim = 6
per_class = 10
seed = 99

[split]
init_per_class = 1
val_per_class = 1
test_per_class = 2
)";
  const ExperimentConfig cfg = parse_config_text(text, "inline");
  CHECK(cfg.rounds == 3);
  CHECK(cfg.budget == Rational(20));
  CHECK(cfg.methods ==
        std::vector<Method>{Method::entropy_full, Method::mixed_allocated});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK(!cfg.correction_enabled);
  CHECK(cfg.allocator == AllocatorKind::greedy);
  CHECK(cfg.costs.c_weak == Rational(1, 10));
  CHECK(cfg.vlm.coarse_accuracy == doctest::Approx(0.7));
  CHECK(cfg.vlm.abstain_prob == doctest::Approx(0.05));
  CHECK(cfg.train.learning_rate == doctest::Approx(0.01));
  CHECK(cfg.train.epochs_per_phase == 12);
  CHECK(cfg.hidden_size == 24);
  CHECK(cfg.synth.per_class == 10);
  CHECK(cfg.split.test_per_class == 2);
}

TEST_CASE("config errors name the key and line") {
  CHECK_THROWS_WITH_AS(parse_config_text("[experiment]\nbogus_key = 1\n", "inline"),
                       doctest::Contains("bogus_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[mystery]\nx = 1\n", "inline"),
                       doctest::Contains("mystery"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nrounds = 0\n", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nrounds = banana\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nbudget = 0\n", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("rounds = 3\n", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[costs]\nc_weak = 2\n", "inline"), ConfigError);
}

TEST_CASE("emit and parse round-trip to the same hash") {
  ExperimentConfig cfg = parse_config_text("", "inline");
  cfg.rounds = 4;
  cfg.budget = Rational(20);
  cfg.costs.c_weak = Rational(1, 20);
  cfg.methods = {Method::badge_full, Method::mixed_allocated};
  cfg.seeds = {4, 5, 6};
  cfg.vlm.coarse_accuracy = 0.73;
  cfg.allocator = AllocatorKind::greedy;
  cfg.features_path = "feats.csv";
  cfg.labelspace_path = "labels.json";

  const std::string text = emit_config(cfg);
  const ExperimentConfig back = parse_config_text(text, "emitted");
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.rounds == 4);
  CHECK(back.costs.c_weak == Rational(1, 20));
  CHECK(back.methods == cfg.methods);
  CHECK(back.features_path == cfg.features_path);
  // and the canonical form is a fixed point
  CHECK(emit_config(back) == text);
}

TEST_CASE("hash is sensitive to every changed field") {
  const ExperimentConfig base = parse_config_text("", "inline");
  ExperimentConfig mod = base;
  mod.budget = Rational(151);
  CHECK(config_hash(mod) != config_hash(base));
  mod = base;
  mod.train.learning_rate = 2e-3;
  CHECK(config_hash(mod) != config_hash(base));
  mod = base;
  mod.synth.seed = 17;
  CHECK(config_hash(mod) != config_hash(base));
}

TEST_CASE("overrides apply on top of a parsed config") {
  ExperimentConfig cfg = parse_config_text("", "inline");
  apply_override(cfg, "experiment.rounds=9");
  apply_override(cfg, "costs.c_weak=1/100");
  apply_override(cfg, "vlm.coarse_accuracy=0.6");
  CHECK(cfg.rounds == 9);
  CHECK(cfg.costs.c_weak == Rational(1, 100));
  CHECK(cfg.vlm.coarse_accuracy == doctest::Approx(0.6));
  CHECK_THROWS_AS(apply_override(cfg, "experiment.rounds"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "nope.rounds=1"), ConfigError);
}

TEST_CASE("config file parsing reports missing files") {
  CHECK_THROWS_AS(parse_config(tmp_file("weakal_missing.ini")), ConfigError);
  const std::string path = tmp_file("weakal_cfg.ini");
  std::ofstream(path) << "[experiment]\nrounds = 2\n";
  CHECK(parse_config(path).rounds == 2);
}

TEST_CASE("chart rendering") {
  std::vector<AggregateRow> table;
  for (int r = 1; r <= 3; ++r) {
    table.push_back({Method::mixed_allocated, r, 0.5 + 0.05 * r, 0.02});
    table.push_back({Method::entropy_full, r, 0.45 + 0.05 * r, 0.03});
  }
  const std::string path = tmp_file("weakal_chart.svg");
  render_chart(table, path);
  const std::string svg = slurp(path);
  CHECK(svg.find("<svg") == 0);
  CHECK(count(svg, "<polyline") == 2);     // one line per method
  CHECK(count(svg, "<polygon") == 2);      // one deviation band per method
  CHECK(count(svg, "<circle") == 6);       // one marker per point
  CHECK(svg.find("mixed-allocated") != std::string::npos);
  CHECK(svg.find("entropy-full") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);

  // byte-determinism
  const std::string path2 = tmp_file("weakal_chart2.svg");
  render_chart(table, path2);
  CHECK(slurp(path2) == svg);
}

TEST_CASE("chart edge cases") {
  CHECK_THROWS_AS(render_chart({}, tmp_file("weakal_none.svg")), DomainError);
  // single round: markers only, no degenerate polyline
  std::vector<AggregateRow> one = {{Method::random_full, 1, 0.5, 0.0}};
  const std::string path = tmp_file("weakal_one.svg");
  render_chart(one, path);
  const std::string svg = slurp(path);
  CHECK(count(svg, "<polyline") == 0);
  CHECK(count(svg, "<circle") == 1);
}

TEST_CASE("chart y range covers the deviation bands with padding") {
  std::vector<AggregateRow> table = {{Method::random_full, 1, 0.5, 0.1},
                                     {Method::random_full, 2, 0.7, 0.1}};
  const auto [lo, hi] = chart_y_range(table);
  // data range [0.4, 0.8] padded by 5% of the span
  CHECK(lo == doctest::Approx(0.4 - 0.02));
  CHECK(hi == doctest::Approx(0.8 + 0.02));
  // degenerate span still opens a window
  std::vector<AggregateRow> flat = {{Method::random_full, 1, 0.5, 0.0}};
  const auto [flo, fhi] = chart_y_range(flat);
  CHECK(flo < 0.5);
  CHECK(fhi > 0.5);
}
