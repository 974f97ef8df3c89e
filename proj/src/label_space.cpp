#include "weakal/label_space.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "weakal/errors.hpp"

namespace weakal {

namespace {

void check_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second)
      throw ConfigError(std::string("duplicate ") + what + " name: '" + n + "'");
  }
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> fine_names,
                       std::vector<std::string> coarse_names,
                       std::vector<int> parent)
    : fine_names_(std::move(fine_names)),
      coarse_names_(std::move(coarse_names)),
      parent_(std::move(parent)) {
  const int kf = k_fine();
  const int kw = k_coarse();
  if (kf == 0 || kw == 0) throw ConfigError("label space must be non-empty");
  if (kw > kf) throw ConfigError("more coarse classes than fine classes");
  if (static_cast<int>(parent_.size()) != kf)
    throw ConfigError("parent map size does not match fine class count");
  check_unique(fine_names_, "fine");
  check_unique(coarse_names_, "coarse");
  std::vector<bool> covered(kw, false);
  for (int f = 0; f < kf; ++f) {
    const int c = parent_[f];
    if (c < 0 || c >= kw)
      throw ConfigError("parent of fine class " + std::to_string(f) + " out of range");
    covered[c] = true;
  }
  for (int c = 0; c < kw; ++c) {
    if (!covered[c])
      throw ConfigError("coarse class '" + coarse_names_[c] + "' has no fine children");
  }
}

int LabelSpace::coarsen(int fine) const {
  if (fine < 0 || fine >= k_fine())
    throw DomainError("coarsen: fine index " + std::to_string(fine) + " out of range");
  return parent_[fine];
}

const std::string& LabelSpace::fine_name(int i) const {
  if (i < 0 || i >= k_fine()) throw DomainError("fine_name: index out of range");
  return fine_names_[i];
}

const std::string& LabelSpace::coarse_name(int i) const {
  if (i < 0 || i >= k_coarse()) throw DomainError("coarse_name: index out of range");
  return coarse_names_[i];
}

std::optional<int> LabelSpace::fine_index(const std::string& name) const {
  for (int i = 0; i < k_fine(); ++i)
    if (fine_names_[i] == name) return i;
  return std::nullopt;
}

std::optional<int> LabelSpace::coarse_index(const std::string& name) const {
  for (int i = 0; i < k_coarse(); ++i)
    if (coarse_names_[i] == name) return i;
  return std::nullopt;
}

LabelSpace LabelSpace::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open label-space file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("label-space file " + path + ": " + e.what());
  }
  try {
    return LabelSpace(j.at("fine").get<std::vector<std::string>>(),
                      j.at("coarse").get<std::vector<std::string>>(),
                      j.at("parent").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("label-space file " + path + ": " + e.what());
  }
}

void LabelSpace::save_json(const std::string& path) const {
  nlohmann::json j;
  j["fine"] = fine_names_;
  j["coarse"] = coarse_names_;
  j["parent"] = parent_;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write label-space file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace weakal
