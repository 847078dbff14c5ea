#ifndef ICEA_DATASET_HPP
#define ICEA_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace icea {

enum class Rule { Friedman1, Friedman2, Friedman3, ProductXY };

const char* rule_name(Rule r);
Rule rule_from_name(const std::string& name);

struct GeneratorSpec {
  Rule rule = Rule::Friedman1;
  size_t n = 0;
  double noise_sd = 0.0;
  uint64_t seed = 0;
  bool normalize_targets = false;
};

// Affine target map y' = (y - offset) / scale, recorded so predictions can be
// compared on the stored scale.
struct TargetScaling {
  bool applied = false;
  double offset = 0.0;
  double scale = 1.0;
};

enum class TargetTransform { None, Log };

struct Provenance {
  std::optional<GeneratorSpec> spec;
  TargetScaling scaling;
  TargetTransform transform = TargetTransform::None;
};

// Column-major so an agent's view is a plain subset of columns.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;
  std::vector<double> targets;
  Provenance provenance;

  size_t rows() const { return targets.size(); }
  size_t features() const { return columns.size(); }
  void fill_row(size_t i, std::vector<double>& out) const;
};

// Which agent sees which feature columns (the F_j sets). Sets may overlap;
// a union that misses columns is legal but reported as a warning.
struct FeatureAssignment {
  std::vector<std::vector<size_t>> agent_features;

  size_t agents() const { return agent_features.size(); }
  // Throws on empty/inconsistent sets; returns warnings (uncovered columns).
  std::vector<std::string> validate(size_t n_features) const;
};

// The hidden rules, exposed directly so tests can pin formula values.
double friedman1_formula(std::span<const double> x);
double friedman2_formula(std::span<const double> x);
double friedman3_formula(std::span<const double> x);
double product_xy_formula(std::span<const double> x);

Dataset generate(const GeneratorSpec& spec);

// The paper's three agent layouts over five features (0-based):
//   1 -> {0},{1},{2},{3},{4}   2 -> {0,1},{1,2},{3,4}   3 -> {0,1,2},{1,3,4}
FeatureAssignment assignment_system(int k);

// Appends one column per coefficient vector as a virtual feature.
Dataset virtual_features(const Dataset& ds,
                         const std::vector<std::vector<double>>& combos);

// Replaces targets with log(targets); requires strictly positive targets.
// The inverse map (exp) is recorded in provenance.transform.
Dataset log_transform_targets(const Dataset& ds);

// Deterministic shuffled split. When the generator asked for target
// normalization it is applied here, with min/max taken from the train part.
std::pair<Dataset, Dataset> split(const Dataset& ds, size_t n_train,
                                  size_t n_test, uint64_t seed);

// Applies pending normalization using ds as its own training part.
void apply_pending_normalization(Dataset& ds);

void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

}  // namespace icea

#endif
