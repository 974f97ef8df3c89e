#pragma once

#include <optional>
#include <string>
#include <vector>

namespace weakal {

// Hierarchical label space: K_f fine classes, K_w coarse classes, and a
// surjective fine -> coarse parent map. Immutable after construction.
class LabelSpace {
 public:
  LabelSpace(std::vector<std::string> fine_names,
             std::vector<std::string> coarse_names,
             std::vector<int> parent);

  int k_fine() const { return static_cast<int>(fine_names_.size()); }
  int k_coarse() const { return static_cast<int>(coarse_names_.size()); }

  // Maps a fine class to its coarse parent; out-of-range -> DomainError.
  int coarsen(int fine) const;

  const std::string& fine_name(int i) const;
  const std::string& coarse_name(int i) const;
  std::optional<int> fine_index(const std::string& name) const;
  std::optional<int> coarse_index(const std::string& name) const;

  const std::vector<std::string>& fine_names() const { return fine_names_; }
  const std::vector<std::string>& coarse_names() const { return coarse_names_; }
  const std::vector<int>& parent() const { return parent_; }

  // JSON object { "fine": [...], "coarse": [...], "parent": [...] }.
  static LabelSpace load_json(const std::string& path);
  void save_json(const std::string& path) const;

 private:
  std::vector<std::string> fine_names_;
  std::vector<std::string> coarse_names_;
  std::vector<int> parent_;
};

}  // namespace weakal
