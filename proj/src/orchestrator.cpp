#include "icea/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "icea/textio.hpp"
#include "json.hpp"

namespace icea {

namespace {

// Neumaier-compensated mean of squares; the monotonicity bookkeeping rides on
// this being accurate to ~1 ulp of the running sum.
double mean_sq(std::span<const double> v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double term = x * x;
    const double s = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
    sum = s;
  }
  return (sum + comp) / static_cast<double>(v.size());
}

double post_fit_sse(std::span<const double> z, std::span<const double> delta) {
  double sum = 0.0, comp = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - delta[i];
    const double term = d * d;
    const double s = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
    sum = s;
  }
  return sum + comp;
}

const FitResponse& expect_fit(const Message& m) {
  const auto* r = std::get_if<FitResponse>(&m);
  if (!r) throw ProtocolError("expected fit_response");
  return *r;
}

const PredictResponse& expect_predict(const Message& m) {
  const auto* r = std::get_if<PredictResponse>(&m);
  if (!r) throw ProtocolError("expected predict_response");
  return *r;
}

// Row-major block of the agent's feature columns for the query rows.
std::vector<std::vector<double>> block_for_agent(const Dataset& ds,
                                                 const std::vector<size_t>& features) {
  std::vector<std::vector<double>> rows(ds.rows(), std::vector<double>(features.size()));
  for (size_t i = 0; i < ds.rows(); ++i)
    for (size_t k = 0; k < features.size(); ++k) rows[i][k] = ds.columns[features[k]][i];
  return rows;
}

Dataset subset_columns(const Dataset& ds, const std::vector<size_t>& features) {
  Dataset out;
  out.provenance = ds.provenance;
  out.targets = ds.targets;
  for (size_t f : features) {
    out.columns.push_back(ds.columns[f]);
    out.feature_names.push_back(ds.feature_names.empty() ? "x" + std::to_string(f + 1)
                                                         : ds.feature_names[f]);
  }
  return out;
}

}  // namespace

int select_agent(const Schedule& schedule, int previous_agent, int agent_count,
                 const std::vector<CandidateFit>& candidates) {
  if (agent_count < 1) throw std::invalid_argument("select_agent: no agents");
  if (schedule.kind == Schedule::Kind::RoundRobin)
    return (previous_agent + 1) % agent_count;

  if (candidates.empty())
    throw std::invalid_argument("select_agent: greedy selection needs candidate fits");
  int best = candidates.front().agent;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    double score = c.post_fit_sse;
    if (schedule.kind == Schedule::Kind::GreedyPenalized)
      score += schedule.lambda * static_cast<double>(c.leaves);
    if (score < best_score || (score == best_score && c.agent < best)) {
      best_score = score;
      best = c.agent;
    }
  }
  return best;
}

RunResult run_icea(const Dataset& train, const Dataset* test,
                   const FeatureAssignment& assign, const Schedule& schedule,
                   const StopRule& stop, Transport& transport) {
  const size_t n = train.rows();
  if (n == 0) throw std::invalid_argument("run_icea: empty training set");
  if (stop.max_updates < 1) throw std::invalid_argument("run_icea: max_updates must be >= 1");
  if (!(stop.eps > 0.0)) throw std::invalid_argument("run_icea: eps must be > 0");

  RunMetrics metrics;
  metrics.warnings = assign.validate(train.features());
  const int agents = static_cast<int>(assign.agents());
  if (agents != transport.agent_count())
    throw std::invalid_argument("run_icea: transport/assignment agent count mismatch");
  if (test && test->features() < train.features())
    throw std::invalid_argument("run_icea: test set is missing feature columns");

  MemoryLedger& ledger = transport.ledger();

  auto residual_block =
      ledger.track(MemoryLedger::kFusion, MemoryLedger::Pool::Protocol, static_cast<long>(n));
  std::vector<double> z = train.targets;
  double mse = mean_sq(z);
  if (!std::isfinite(mse)) throw std::invalid_argument("run_icea: non-finite targets");
  const double eps_abs = stop.eps_is_relative ? stop.eps * mse : stop.eps;

  // Test blocks stay with the harness; the fusion side only keeps the
  // accumulator, in the evaluation pool.
  std::vector<std::vector<std::vector<double>>> test_blocks;
  std::vector<double> test_acc;
  MemoryLedger::Block test_acc_block;
  if (test) {
    for (int j = 0; j < agents; ++j)
      test_blocks.push_back(block_for_agent(*test, transport.agent_features(j)));
    test_acc_block = ledger.track(MemoryLedger::kFusion, MemoryLedger::Pool::Evaluation,
                                  static_cast<long>(test->rows()));
    test_acc.assign(test->rows(), 0.0);
  }

  std::vector<AgentModel> models(agents);
  for (int j = 0; j < agents; ++j)
    models[j] = AgentModel{j, transport.agent_features(j), {}};

  uint64_t seq = 0;
  auto next_run_id = [&seq] { return ++seq; };

  auto eval_test_mse = [&]() {
    std::fill(test_acc.begin(), test_acc.end(), 0.0);
    for (int j = 0; j < agents; ++j) {
      Message resp =
          transport.exchange(j, PredictRequest{next_run_id(), test_blocks[j]});
      const auto& values = expect_predict(resp).values;
      if (values.size() != test_acc.size())
        throw ProtocolError("predict_response: wrong value count");
      auto scratch = ledger.track(MemoryLedger::kFusion, MemoryLedger::Pool::Evaluation,
                                  static_cast<long>(values.size()));
      for (size_t i = 0; i < values.size(); ++i) test_acc[i] += values[i];
    }
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < test_acc.size(); ++i) {
      const double d = test->targets[i] - test_acc[i];
      const double term = d * d;
      const double s = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
      sum = s;
    }
    return (sum + comp) / static_cast<double>(test_acc.size());
  };

  const bool greedy = schedule.kind != Schedule::Kind::RoundRobin;
  double err_prev = mse;
  long seen_messages = 0, seen_scalars = 0;
  int update = 0;
  int rr_prev = -1;

  while (update < stop.max_updates) {
    const int round = greedy ? update + 1 : update / agents + 1;
    int chosen;
    FitResponse winner;

    if (!greedy) {
      chosen = select_agent(schedule, rr_prev, agents, {});
      rr_prev = chosen;
      winner = expect_fit(transport.exchange(chosen, FitRequest{next_run_id(), true, z}));
    } else {
      std::vector<CandidateFit> candidates;
      candidates.reserve(agents);
      for (int j = 0; j < agents; ++j) {
        Message resp = transport.exchange(j, FitRequest{next_run_id(), false, z});
        const auto& fit = expect_fit(resp);
        if (fit.delta_predictions.size() != n)
          throw ProtocolError("fit_response: wrong delta length");
        auto scratch = ledger.track(MemoryLedger::kFusion, MemoryLedger::Pool::Protocol,
                                    static_cast<long>(n));
        candidates.push_back({j, post_fit_sse(z, fit.delta_predictions), fit.leaves});
      }
      chosen = select_agent(schedule, rr_prev, agents, candidates);
      // Deterministic refit of the winner on the same residual commits it.
      winner = expect_fit(transport.exchange(chosen, FitRequest{next_run_id(), true, z}));
    }

    if (winner.delta_predictions.size() != n)
      throw ProtocolError("fit_response: wrong delta length");
    {
      auto scratch = ledger.track(MemoryLedger::kFusion, MemoryLedger::Pool::Protocol,
                                  static_cast<long>(n));
      for (size_t i = 0; i < n; ++i) z[i] -= winner.delta_predictions[i];
    }
    mse = mean_sq(z);
    if (!std::isfinite(mse)) throw std::runtime_error("run_icea: residual went non-finite");

    models[chosen].trees.emplace_back(RegressionTree::from_json(winner.model_summary), round);

    ++update;
    UpdateRecord rec;
    rec.update = update;
    rec.round = round;
    rec.agent = chosen;
    rec.train_mse = mse;
    rec.leaves = winner.leaves;

    const bool round_end = greedy || update % agents == 0 || update == stop.max_updates;
    if (test && round_end) rec.test_mse = eval_test_mse();

    rec.messages = transport.counters().messages - seen_messages;
    rec.scalars_sent = transport.counters().scalars - seen_scalars;
    seen_messages = transport.counters().messages;
    seen_scalars = transport.counters().scalars;
    metrics.updates.push_back(rec);

    if (greedy || update % agents == 0) {
      if (std::abs(err_prev - mse) <= eps_abs) {
        metrics.converged = true;
        break;
      }
      err_prev = mse;
    }
  }

  transport.shutdown();

  std::vector<size_t> feature_counts;
  for (int j = 0; j < agents; ++j) feature_counts.push_back(transport.agent_features(j).size());

  RunResult result;
  result.models = std::move(models);
  result.metrics = std::move(metrics);
  result.audit = ledger.audit(n, feature_counts);
  return result;
}

RunResult run_icea(const Dataset& train, const Dataset* test,
                   const FeatureAssignment& assign, const Schedule& schedule,
                   const StopRule& stop, const TreeParams& params,
                   const TransportConfig& config, double shrinkage) {
  std::unique_ptr<Transport> transport =
      config.carrier == TransportConfig::Carrier::InProcess
          ? make_in_process_transport(train, assign, params, shrinkage)
          : make_local_socket_transport(train, assign, params, shrinkage, config.port_base);
  return run_icea(train, test, assign, schedule, stop, *transport);
}

RunResult run_l2_boosting(const Dataset& train, const Dataset* test,
                          const TreeParams& params, const StopRule& stop,
                          const TransportConfig& config, double shrinkage) {
  FeatureAssignment all;
  all.agent_features.emplace_back();
  for (size_t f = 0; f < train.features(); ++f) all.agent_features[0].push_back(f);
  return run_icea(train, test, all, Schedule::round_robin(), stop, params, config, shrinkage);
}

HierarchicalResult run_hierarchical(const Dataset& train, const Dataset* test,
                                    const FeatureAssignment& assign,
                                    const TreeParams& params, const StopRule& stop,
                                    double shrinkage) {
  assign.validate(train.features());
  const int agents = static_cast<int>(assign.agents());

  // Equal total weak-learner budget: each stage-1 agent gets 1/D of the
  // update budget an ICEA run would spend.
  StopRule stage1_stop = stop;
  stage1_stop.max_updates = std::max(1, stop.max_updates / agents);

  HierarchicalResult result;
  Dataset derived_train;
  Dataset derived_test;
  derived_train.targets = train.targets;
  if (test) derived_test.targets = test->targets;

  for (int j = 0; j < agents; ++j) {
    Dataset sub_train = subset_columns(train, assign.agent_features[j]);
    RunResult stage1 = run_l2_boosting(sub_train, nullptr, params, stage1_stop);

    AgentModel model = std::move(stage1.models[0]);
    std::vector<double> train_pred = predict_ensemble({model}, sub_train.columns);
    derived_train.columns.push_back(std::move(train_pred));
    derived_train.feature_names.push_back("g" + std::to_string(j + 1));
    if (test) {
      Dataset sub_test = subset_columns(*test, assign.agent_features[j]);
      derived_test.columns.push_back(predict_ensemble({model}, sub_test.columns));
      derived_test.feature_names.push_back("g" + std::to_string(j + 1));
    }

    model.agent_id = j;
    model.features = assign.agent_features[j];  // re-point at the global columns
    result.stage1.push_back(std::move(model));
    result.stage1_metrics.push_back(std::move(stage1.metrics));
  }

  // The fusion combiner recalibrates the agent outputs additively (stumps
  // over the g_j columns); it does not get to invent interactions the agents
  // never produced.
  TreeParams stage2_params = params;
  stage2_params.max_depth = 1;
  RunResult stage2 = run_l2_boosting(derived_train, test ? &derived_test : nullptr,
                                     stage2_params, stop, {}, shrinkage);
  result.stage2 = std::move(stage2.models[0]);
  result.metrics = std::move(stage2.metrics);
  return result;
}

std::vector<double> predict_hierarchical(const HierarchicalResult& model,
                                         const std::vector<std::vector<double>>& columns) {
  std::vector<std::vector<double>> derived;
  derived.reserve(model.stage1.size());
  for (const auto& agent : model.stage1)
    derived.push_back(predict_ensemble({agent}, columns));
  return predict_ensemble({model.stage2}, derived);
}

double AgentModel::predict_row(std::span<const double> full_row) const {
  std::vector<double> local(features.size());
  for (size_t k = 0; k < features.size(); ++k) {
    if (features[k] >= full_row.size())
      throw std::invalid_argument("AgentModel: row is missing feature column " +
                                  std::to_string(features[k]));
    local[k] = full_row[features[k]];
  }
  double sum = 0.0;
  for (const auto& [tree, round] : trees) sum += tree.predict_row(local);
  return sum;
}

std::vector<double> predict_ensemble(const std::vector<AgentModel>& models,
                                     const std::vector<std::vector<double>>& columns) {
  const size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& model : models)
    for (size_t f : model.features)
      if (f >= columns.size())
        throw std::invalid_argument("predict_ensemble: missing feature column " +
                                    std::to_string(f));

  std::vector<double> out(n, 0.0);
  std::vector<double> local;
  for (const auto& model : models) {
    local.resize(model.features.size());
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < model.features.size(); ++k)
        local[k] = columns[model.features[k]][i];
      for (const auto& [tree, round] : model.trees) out[i] += tree.predict_row(local);
    }
  }
  return out;
}

std::string AgentModel::to_json() const {
  nlohmann::json j;
  j["agent_id"] = agent_id;
  j["features"] = features;
  j["trees"] = nlohmann::json::array();
  for (const auto& [tree, round] : trees)
    j["trees"].push_back({{"round", round}, {"tree", nlohmann::json::parse(tree.to_json())}});
  return j.dump();
}

AgentModel AgentModel::from_json(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AgentModel m;
  m.agent_id = j.at("agent_id").get<int>();
  m.features = j.at("features").get<std::vector<size_t>>();
  for (const auto& t : j.at("trees"))
    m.trees.emplace_back(RegressionTree::from_json(t.at("tree").dump()),
                         t.at("round").get<int>());
  return m;
}

void RunMetrics::write_csv(std::ostream& out) const {
  out << "update,round,agent,train_mse,test_mse,leaves,messages,scalars_sent\n";
  for (const auto& r : updates) {
    out << r.update << ',' << r.round << ',' << r.agent << ','
        << format_double(r.train_mse) << ','
        << (r.test_mse ? format_double(*r.test_mse) : std::string()) << ',' << r.leaves
        << ',' << r.messages << ',' << r.scalars_sent << '\n';
  }
}

std::string RunMetrics::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

RunMetrics RunMetrics::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "update,round,agent,train_mse,test_mse,leaves,messages,scalars_sent")
    throw std::runtime_error("RunMetrics::read_csv: bad header");

  RunMetrics m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    while (cells.size() < 8) cells.push_back("");  // trailing empty cell
    if (cells.size() != 8) throw std::runtime_error("RunMetrics::read_csv: ragged row");

    UpdateRecord r;
    r.update = std::stoi(cells[0]);
    r.round = std::stoi(cells[1]);
    r.agent = std::stoi(cells[2]);
    r.train_mse = parse_double(cells[3]);
    if (!cells[4].empty()) r.test_mse = parse_double(cells[4]);
    r.leaves = std::stoi(cells[5]);
    r.messages = std::stol(cells[6]);
    r.scalars_sent = std::stol(cells[7]);
    m.updates.push_back(r);
  }
  return m;
}

}  // namespace icea
