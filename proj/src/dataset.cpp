#include "icea/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "icea/rng.hpp"
#include "icea/textio.hpp"
#include "json.hpp"

namespace icea {

namespace {

constexpr uint64_t kFeatureStream = 0;
constexpr uint64_t kNoiseStream = 1;
constexpr uint64_t kShuffleStream = 2;

nlohmann::json provenance_to_json(const Provenance& p) {
  nlohmann::json j;
  if (p.spec) {
    j["spec"] = {{"rule", rule_name(p.spec->rule)},
                 {"n", p.spec->n},
                 {"noise_sd", p.spec->noise_sd},
                 {"seed", p.spec->seed},
                 {"normalize_targets", p.spec->normalize_targets}};
  }
  j["scaling"] = {{"applied", p.scaling.applied},
                  {"offset", p.scaling.offset},
                  {"scale", p.scaling.scale}};
  j["transform"] = p.transform == TargetTransform::Log ? "log" : "none";
  return j;
}

Provenance provenance_from_json(const nlohmann::json& j) {
  Provenance p;
  if (j.contains("spec")) {
    const auto& s = j.at("spec");
    GeneratorSpec spec;
    spec.rule = rule_from_name(s.at("rule").get<std::string>());
    spec.n = s.at("n").get<size_t>();
    spec.noise_sd = s.at("noise_sd").get<double>();
    spec.seed = s.at("seed").get<uint64_t>();
    spec.normalize_targets = s.at("normalize_targets").get<bool>();
    p.spec = spec;
  }
  if (j.contains("scaling")) {
    p.scaling.applied = j.at("scaling").at("applied").get<bool>();
    p.scaling.offset = j.at("scaling").at("offset").get<double>();
    p.scaling.scale = j.at("scaling").at("scale").get<double>();
  }
  if (j.contains("transform") && j.at("transform").get<std::string>() == "log")
    p.transform = TargetTransform::Log;
  return p;
}

std::filesystem::path meta_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p += ".meta.json";
  return p;
}

}  // namespace

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Friedman1: return "friedman1";
    case Rule::Friedman2: return "friedman2";
    case Rule::Friedman3: return "friedman3";
    case Rule::ProductXY: return "productxy";
  }
  throw std::logic_error("rule_name: bad rule");
}

Rule rule_from_name(const std::string& name) {
  if (name == "friedman1") return Rule::Friedman1;
  if (name == "friedman2") return Rule::Friedman2;
  if (name == "friedman3") return Rule::Friedman3;
  if (name == "productxy") return Rule::ProductXY;
  throw std::invalid_argument("unknown rule '" + name + "'");
}

void Dataset::fill_row(size_t i, std::vector<double>& out) const {
  out.resize(columns.size());
  for (size_t f = 0; f < columns.size(); ++f) out[f] = columns[f][i];
}

std::vector<std::string> FeatureAssignment::validate(size_t n_features) const {
  if (agent_features.empty())
    throw std::invalid_argument("FeatureAssignment: no agents");
  std::set<size_t> covered;
  for (size_t j = 0; j < agent_features.size(); ++j) {
    if (agent_features[j].empty())
      throw std::invalid_argument("FeatureAssignment: agent " + std::to_string(j) +
                                  " has no features");
    for (size_t f : agent_features[j]) {
      if (f >= n_features)
        throw std::invalid_argument("FeatureAssignment: feature index " +
                                    std::to_string(f) + " out of range");
      covered.insert(f);
    }
  }
  std::vector<std::string> warnings;
  if (covered.size() < n_features) {
    std::string missing;
    for (size_t f = 0; f < n_features; ++f)
      if (!covered.count(f)) missing += (missing.empty() ? "" : ",") + std::to_string(f);
    warnings.push_back("assignment does not cover feature columns {" + missing + "}");
  }
  return warnings;
}

double friedman1_formula(std::span<const double> x) {
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
         20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
}

double friedman2_formula(std::span<const double> x) {
  const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
  return std::sqrt(x[0] * x[0] + inner * inner);
}

double friedman3_formula(std::span<const double> x) {
  const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
  return std::atan(inner / x[0]);
}

double product_xy_formula(std::span<const double> x) { return x[0] * x[1]; }

Dataset generate(const GeneratorSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("generate: n must be >= 1");
  if (spec.noise_sd < 0.0) throw std::invalid_argument("generate: negative noise_sd");

  size_t m = 0;
  double (*formula)(std::span<const double>) = nullptr;
  switch (spec.rule) {
    case Rule::Friedman1: m = 5; formula = friedman1_formula; break;
    case Rule::Friedman2: m = 5; formula = friedman2_formula; break;
    case Rule::Friedman3: m = 5; formula = friedman3_formula; break;
    case Rule::ProductXY: m = 2; formula = product_xy_formula; break;
  }

  Dataset ds;
  ds.columns.assign(m, std::vector<double>(spec.n));
  ds.targets.resize(spec.n);
  for (size_t f = 0; f < m; ++f) ds.feature_names.push_back("x" + std::to_string(f + 1));

  CounterRng features(spec.seed, kFeatureStream);
  CounterRng noise(spec.seed, kNoiseStream);
  std::vector<double> row(m);

  for (size_t i = 0; i < spec.n; ++i) {
    switch (spec.rule) {
      case Rule::Friedman1:
        for (size_t f = 0; f < 5; ++f) row[f] = features.next_unit();
        break;
      case Rule::Friedman2:
      case Rule::Friedman3:
        // x1~U[1,100], x2~U[40pi,560pi], x3~U[0,1], x4~U[1,11], x5~U[0,1];
        // x5 never enters the formula.
        row[0] = features.next_uniform(1.0, 100.0);
        row[1] = features.next_uniform(40.0 * std::numbers::pi, 560.0 * std::numbers::pi);
        row[2] = features.next_unit();
        row[3] = features.next_uniform(1.0, 11.0);
        row[4] = features.next_unit();
        break;
      case Rule::ProductXY:
        row[0] = features.next_normal();
        row[1] = features.next_normal();
        break;
    }
    for (size_t f = 0; f < m; ++f) ds.columns[f][i] = row[f];
    double y = formula(row);
    if (spec.noise_sd > 0.0) y += spec.noise_sd * noise.next_normal();
    ds.targets[i] = y;
  }

  ds.provenance.spec = spec;
  return ds;
}

FeatureAssignment assignment_system(int k) {
  switch (k) {
    case 1: return {{{0}, {1}, {2}, {3}, {4}}};
    case 2: return {{{0, 1}, {1, 2}, {3, 4}}};
    case 3: return {{{0, 1, 2}, {1, 3, 4}}};
    default: throw std::invalid_argument("assignment_system: k must be 1, 2 or 3");
  }
}

Dataset virtual_features(const Dataset& ds,
                         const std::vector<std::vector<double>>& combos) {
  Dataset out = ds;
  for (size_t c = 0; c < combos.size(); ++c) {
    if (combos[c].size() != ds.features())
      throw std::invalid_argument("virtual_features: coefficient vector length mismatch");
    std::vector<double> col(ds.rows(), 0.0);
    for (size_t f = 0; f < ds.features(); ++f) {
      if (combos[c][f] == 0.0) continue;
      for (size_t i = 0; i < ds.rows(); ++i) col[i] += combos[c][f] * ds.columns[f][i];
    }
    for (double v : col)
      if (!std::isfinite(v))
        throw std::invalid_argument("virtual_features: non-finite combination");
    out.columns.push_back(std::move(col));
    out.feature_names.push_back("v" + std::to_string(c + 1));
  }
  return out;
}

Dataset log_transform_targets(const Dataset& ds) {
  Dataset out = ds;
  for (size_t i = 0; i < ds.rows(); ++i) {
    if (!(ds.targets[i] > 0.0))
      throw std::invalid_argument("log_transform_targets: non-positive target at row " +
                                  std::to_string(i));
    out.targets[i] = std::log(ds.targets[i]);
  }
  out.provenance.transform = TargetTransform::Log;
  return out;
}

void apply_pending_normalization(Dataset& ds) {
  if (!ds.provenance.spec || !ds.provenance.spec->normalize_targets) return;
  if (ds.provenance.scaling.applied) return;
  auto [lo, hi] = std::minmax_element(ds.targets.begin(), ds.targets.end());
  const double offset = *lo;
  const double scale = (*hi > *lo) ? (*hi - *lo) : 1.0;
  for (double& y : ds.targets) y = (y - offset) / scale;
  ds.provenance.scaling = {true, offset, scale};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, size_t n_train, size_t n_test,
                                  uint64_t seed) {
  if (n_train + n_test > ds.rows())
    throw std::invalid_argument("split: n_train + n_test exceeds available rows");
  if (n_train == 0) throw std::invalid_argument("split: empty train part");

  std::vector<size_t> order(ds.rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterRng rng(seed, kShuffleStream);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);

  auto take = [&](size_t begin, size_t count) {
    Dataset part;
    part.feature_names = ds.feature_names;
    part.provenance = ds.provenance;
    part.columns.assign(ds.features(), {});
    for (auto& col : part.columns) col.reserve(count);
    part.targets.reserve(count);
    for (size_t k = 0; k < count; ++k) {
      size_t i = order[begin + k];
      for (size_t f = 0; f < ds.features(); ++f) part.columns[f].push_back(ds.columns[f][i]);
      part.targets.push_back(ds.targets[i]);
    }
    return part;
  };

  Dataset train = take(0, n_train);
  Dataset test = take(n_train, n_test);

  // Normalization parameters come from the train part only.
  if (train.provenance.spec && train.provenance.spec->normalize_targets &&
      !train.provenance.scaling.applied) {
    auto [lo, hi] = std::minmax_element(train.targets.begin(), train.targets.end());
    const double offset = *lo;
    const double scale = (*hi > *lo) ? (*hi - *lo) : 1.0;
    for (double& y : train.targets) y = (y - offset) / scale;
    for (double& y : test.targets) y = (y - offset) / scale;
    train.provenance.scaling = {true, offset, scale};
    test.provenance.scaling = {true, offset, scale};
  }
  return {std::move(train), std::move(test)};
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (const auto& name : ds.feature_names) out << name << ",";
  out << "target\n";
  for (size_t i = 0; i < ds.rows(); ++i) {
    for (size_t f = 0; f < ds.features(); ++f) out << format_double(ds.columns[f][i]) << ",";
    out << format_double(ds.targets[i]) << "\n";
  }
  out.close();

  std::ofstream meta(meta_path(path), std::ios::binary);
  meta << provenance_to_json(ds.provenance).dump(2) << "\n";
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  std::vector<std::string> headers;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) headers.push_back(cell);
  if (headers.size() < 2 || headers.back() != "target")
    throw std::runtime_error("read_csv: expected feature columns then 'target'");

  Dataset ds;
  ds.feature_names.assign(headers.begin(), headers.end() - 1);
  ds.columns.assign(ds.feature_names.size(), {});

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    size_t f = 0;
    while (std::getline(ls, cell, ',')) {
      double v = parse_double(cell);
      if (f < ds.columns.size()) ds.columns[f].push_back(v);
      else ds.targets.push_back(v);
      ++f;
    }
    if (f != headers.size()) throw std::runtime_error("read_csv: ragged row");
  }
  if (ds.targets.empty()) throw std::runtime_error("read_csv: no data rows");

  std::ifstream meta(meta_path(path), std::ios::binary);
  if (meta) {
    nlohmann::json j = nlohmann::json::parse(meta);
    ds.provenance = provenance_from_json(j);
  }
  return ds;
}

}  // namespace icea
