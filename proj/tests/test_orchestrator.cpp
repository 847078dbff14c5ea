#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "icea/orchestrator.hpp"
#include "icea/rng.hpp"

using namespace icea;

namespace {

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

// Additive target over two disjoint single-feature agents, built from step
// functions a depth-limited tree can represent exactly.
Dataset additive_step_dataset(size_t n, uint64_t seed) {
  CounterRng rng(seed);
  Dataset ds;
  ds.feature_names = {"x1", "x2"};
  ds.columns.assign(2, std::vector<double>(n));
  ds.targets.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double x1 = rng.next_unit();
    double x2 = rng.next_unit();
    ds.columns[0][i] = x1;
    ds.columns[1][i] = x2;
    ds.targets[i] = (x1 > 0.5 ? 2.0 : 0.0) + (x2 > 0.3 ? -3.0 : 0.0) + (x2 > 0.8 ? 1.0 : 0.0);
  }
  return ds;
}

Dataset friedman_train(size_t n, uint64_t seed) {
  return generate(GeneratorSpec{Rule::Friedman1, n, 0.0, seed, false});
}

}  // namespace

TEST_CASE("select_agent follows the schedule") {
  CHECK(select_agent(Schedule::round_robin(), 1, 3, {}) == 2);
  CHECK(select_agent(Schedule::round_robin(), 2, 3, {}) == 0);
  CHECK(select_agent(Schedule::round_robin(), -1, 3, {}) == 0);

  std::vector<CandidateFit> fits = {{0, 4.0, 4}, {1, 3.5, 4}};
  CHECK(select_agent(Schedule::greedy(), -1, 2, fits) == 1);

  // SSE 3.5 with 8 leaves loses to SSE 4.0 with 2 leaves at lambda 1
  std::vector<CandidateFit> pen = {{0, 3.5, 8}, {1, 4.0, 2}};
  CHECK(select_agent(Schedule::greedy_penalized(1.0), -1, 2, pen) == 1);

  std::vector<CandidateFit> tie = {{0, 1.0, 1}, {1, 1.0, 1}};
  CHECK(select_agent(Schedule::greedy(), -1, 2, tie) == 0);

  CHECK_THROWS_AS(select_agent(Schedule::greedy(), -1, 2, {}), std::invalid_argument);
  CHECK_THROWS_AS(select_agent(Schedule::round_robin(), -1, 0, {}), std::invalid_argument);
}

TEST_CASE("predict_ensemble sums agent estimators") {
  std::vector<std::vector<double>> columns = {{1, 2, 3}, {10, 20, 30}};

  CHECK(predict_ensemble({}, columns) == std::vector<double>{0, 0, 0});

  AgentModel constant;
  constant.agent_id = 0;
  constant.features = {0};
  constant.trees.emplace_back(
      RegressionTree::fit({{0.0, 1.0}}, std::vector<double>{4.0, 4.0}, TreeParams{0, 1, 0.0}),
      1);
  CHECK(predict_ensemble({constant}, columns) == std::vector<double>{4, 4, 4});

  // two disjoint agents add elementwise
  AgentModel left, right;
  left.features = {0};
  left.trees.emplace_back(
      RegressionTree::fit({{1.0, 2.0, 3.0}}, std::vector<double>{1, 1, 7}, TreeParams{1, 1, 0.0}),
      1);
  right.agent_id = 1;
  right.features = {1};
  right.trees.emplace_back(
      RegressionTree::fit({{10.0, 20.0, 30.0}}, std::vector<double>{5, 9, 9},
                          TreeParams{1, 1, 0.0}),
      1);
  std::vector<double> lhs = predict_ensemble({left}, columns);
  std::vector<double> rhs = predict_ensemble({right}, columns);
  std::vector<double> both = predict_ensemble({left, right}, columns);
  for (size_t i = 0; i < 3; ++i) CHECK(both[i] == lhs[i] + rhs[i]);

  AgentModel missing;
  missing.features = {5};
  CHECK_THROWS_AS(predict_ensemble({missing}, columns), std::invalid_argument);
}

TEST_CASE("additive target is recovered to near-zero training error") {
  Dataset train = additive_step_dataset(1000, 21);
  // brute-force check that the additive decomposition fits the sample exactly
  for (size_t i = 0; i < train.rows(); ++i) {
    double f1 = train.columns[0][i] > 0.5 ? 2.0 : 0.0;
    double f2 = (train.columns[1][i] > 0.3 ? -3.0 : 0.0) +
                (train.columns[1][i] > 0.8 ? 1.0 : 0.0);
    REQUIRE(train.targets[i] == f1 + f2);
  }

  FeatureAssignment assign{{{0}, {1}}};
  StopRule stop{1e-9, true, 200};
  RunResult run = run_icea(train, nullptr, assign, Schedule::round_robin(), stop,
                           TreeParams{4, 1, 0.0});
  CHECK(run.metrics.updates.back().train_mse < 1e-3 * variance(train.targets));
}

TEST_CASE("pure interaction with 1-dim agents learns nothing") {
  Dataset train = generate(GeneratorSpec{Rule::ProductXY, 600, 0.0, 33, false});
  FeatureAssignment assign{{{0}, {1}}};
  // min_gain above the best noise-split gain freezes the agents at the mean
  double sse0 = 0.0;
  for (double y : train.targets) sse0 += y * y;
  TreeParams params{4, 5, 0.05 * sse0 / 1.0};
  StopRule stop{1e-6, true, 100};
  RunResult run = run_icea(train, nullptr, assign, Schedule::round_robin(), stop, params);
  CHECK(run.metrics.converged);
  CHECK(run.metrics.updates.back().train_mse >= 0.9 * variance(train.targets));
}

TEST_CASE("D=1 ICEA and L2 boosting are the same run") {
  Dataset train = friedman_train(300, 41);
  Dataset test = friedman_train(200, 42);
  FeatureAssignment all{{{0, 1, 2, 3, 4}}};
  StopRule stop{1e-6, true, 40};
  TreeParams params{3, 5, 0.0};

  RunResult icea = run_icea(train, &test, all, Schedule::round_robin(), stop, params);
  RunResult boost = run_l2_boosting(train, &test, params, stop);
  CHECK(icea.metrics.to_csv() == boost.metrics.to_csv());
}

TEST_CASE("constant target collapses immediately") {
  Dataset train;
  train.feature_names = {"x1"};
  train.columns = {{1, 2, 3, 4}};
  train.targets = {2.5, 2.5, 2.5, 2.5};
  RunResult run = run_l2_boosting(train, nullptr, TreeParams{}, StopRule{});
  CHECK(run.metrics.updates.front().train_mse == 0.0);
  CHECK(run.metrics.converged);
}

TEST_CASE("training MSE is non-increasing under every schedule") {
  Dataset train = friedman_train(400, 51);
  FeatureAssignment assign = assignment_system(2);
  StopRule stop{1e-9, true, 60};
  TreeParams params{4, 5, 0.0};

  for (Schedule schedule : {Schedule::round_robin(), Schedule::greedy(),
                            Schedule::greedy_penalized(0.5)}) {
    RunResult run = run_icea(train, nullptr, assign, schedule, stop, params);
    REQUIRE(!run.metrics.updates.empty());
    for (size_t i = 1; i < run.metrics.updates.size(); ++i)
      CHECK(run.metrics.updates[i].train_mse <= run.metrics.updates[i - 1].train_mse);
  }
}

TEST_CASE("residual identity: z equals y minus the ensemble prediction") {
  Dataset train = friedman_train(256, 61);
  FeatureAssignment assign = assignment_system(3);
  StopRule stop{1e-8, true, 50};
  RunResult run = run_icea(train, nullptr, assign, Schedule::round_robin(), stop,
                           TreeParams{4, 5, 0.0});

  std::vector<double> pred = predict_ensemble(run.models, train.columns);
  const double final_mse = run.metrics.updates.back().train_mse;
  double mse_from_models = 0.0;
  for (size_t i = 0; i < train.rows(); ++i) {
    double r = train.targets[i] - pred[i];
    mse_from_models += r * r;
  }
  mse_from_models /= static_cast<double>(train.rows());
  CHECK(std::abs(mse_from_models - final_mse) <= 1e-10 * static_cast<double>(train.rows()));
}

TEST_CASE("fixed seed gives bit-identical metrics across runs and carriers") {
  Dataset full = friedman_train(400, 71);
  auto [train, test] = split(full, 250, 150, 7);
  FeatureAssignment assign = assignment_system(1);
  StopRule stop{1e-7, true, 30};
  TreeParams params{3, 5, 0.0};

  RunResult a = run_icea(train, &test, assign, Schedule::round_robin(), stop, params,
                         {TransportConfig::Carrier::InProcess, 0});
  RunResult b = run_icea(train, &test, assign, Schedule::round_robin(), stop, params,
                         {TransportConfig::Carrier::InProcess, 0});
  RunResult c = run_icea(train, &test, assign, Schedule::round_robin(), stop, params,
                         {TransportConfig::Carrier::LocalSocket, 0});
  CHECK(a.metrics.to_csv() == b.metrics.to_csv());
  CHECK(a.metrics.to_csv() == c.metrics.to_csv());
  CHECK(a.audit.pass);
  CHECK(c.audit.pass);
}

TEST_CASE("uncovered features produce a warning, not an error") {
  Dataset train = friedman_train(100, 81);
  FeatureAssignment assign{{{0}, {1}}};  // columns 2..4 unused
  RunResult run = run_icea(train, nullptr, assign, Schedule::round_robin(),
                           StopRule{1e-6, true, 10}, TreeParams{});
  REQUIRE(run.metrics.warnings.size() == 1);
  CHECK(run.metrics.warnings[0].find("2,3,4") != std::string::npos);
}

TEST_CASE("greedy commits exactly the winning agent's tree") {
  Dataset train = additive_step_dataset(200, 91);
  FeatureAssignment assign{{{0}, {1}}};
  StopRule stop{1e-9, true, 8};
  RunResult run = run_icea(train, nullptr, assign, Schedule::greedy(), stop,
                           TreeParams{2, 1, 0.0});
  size_t total_trees = 0;
  for (const auto& m : run.models) total_trees += m.trees.size();
  CHECK(total_trees == run.metrics.updates.size());
  // x2 carries the bigger step, so the first greedy pick is agent 1
  CHECK(run.metrics.updates.front().agent == 1);
}

TEST_CASE("hierarchical with D=1 cannot beat plain boosting") {
  Dataset full = friedman_train(700, 101);
  auto [train, test] = split(full, 400, 300, 3);
  FeatureAssignment all{{{0, 1, 2, 3, 4}}};
  StopRule stop{1e-7, true, 60};
  TreeParams params{3, 5, 0.0};

  RunResult boost = run_l2_boosting(train, &test, params, stop);
  HierarchicalResult hier = run_hierarchical(train, &test, all, params, stop);
  double boost_test = *boost.metrics.updates.back().test_mse;
  double hier_test = *hier.metrics.updates.back().test_mse;
  CHECK(hier_test >= boost_test - 1e-12);
}

TEST_CASE("cooperation beats the hierarchical baseline on an additive target") {
  Dataset full = additive_step_dataset(900, 111);
  auto [train, test] = split(full, 500, 400, 5);
  FeatureAssignment assign{{{0}, {1}}};
  StopRule stop{1e-8, true, 60};
  TreeParams params{3, 5, 0.0};

  RunResult icea = run_icea(train, &test, assign, Schedule::round_robin(), stop, params);
  HierarchicalResult hier = run_hierarchical(train, &test, assign, params, stop);
  CHECK(*icea.metrics.updates.back().test_mse < *hier.metrics.updates.back().test_mse);

  // composed prediction matches the stage metrics
  std::vector<double> pred = predict_hierarchical(hier, test.columns);
  double mse = 0.0;
  for (size_t i = 0; i < test.rows(); ++i) {
    double d = test.targets[i] - pred[i];
    mse += d * d;
  }
  mse /= static_cast<double>(test.rows());
  CHECK(mse == doctest::Approx(*hier.metrics.updates.back().test_mse).epsilon(1e-12));
}

TEST_CASE("metrics CSV round-trips") {
  Dataset train = friedman_train(150, 121);
  Dataset test = friedman_train(100, 122);
  RunResult run = run_l2_boosting(train, &test, TreeParams{3, 5, 0.0},
                                  StopRule{1e-6, true, 12});
  std::string csv = run.metrics.to_csv();
  std::istringstream in(csv);
  RunMetrics back = RunMetrics::read_csv(in);
  REQUIRE(back.updates.size() == run.metrics.updates.size());
  std::ostringstream out;
  back.write_csv(out);
  CHECK(out.str() == csv);
}

TEST_CASE("agent model JSON round-trips") {
  Dataset train = additive_step_dataset(120, 131);
  FeatureAssignment assign{{{0}, {1}}};
  RunResult run = run_icea(train, nullptr, assign, Schedule::round_robin(),
                           StopRule{1e-8, true, 10}, TreeParams{2, 2, 0.0});
  for (const auto& model : run.models) {
    AgentModel back = AgentModel::from_json(model.to_json());
    CHECK(back.to_json() == model.to_json());
    CHECK(back.agent_id == model.agent_id);
    CHECK(back.features == model.features);
  }
}

TEST_CASE("invalid stop rules are rejected") {
  Dataset train = friedman_train(50, 141);
  FeatureAssignment assign = assignment_system(1);
  CHECK_THROWS_AS(run_icea(train, nullptr, assign, Schedule::round_robin(),
                           StopRule{0.0, true, 10}, TreeParams{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_icea(train, nullptr, assign, Schedule::round_robin(),
                           StopRule{1e-6, true, 0}, TreeParams{}),
                  std::invalid_argument);
}
