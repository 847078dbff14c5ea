#ifndef ICEA_ORCHESTRATOR_HPP
#define ICEA_ORCHESTRATOR_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "icea/dataset.hpp"
#include "icea/ledger.hpp"
#include "icea/transport.hpp"
#include "icea/tree.hpp"

namespace icea {

struct Schedule {
  enum class Kind { RoundRobin, Greedy, GreedyPenalized };
  Kind kind = Kind::RoundRobin;
  double lambda = 0.0;  // leaf penalty for GreedyPenalized

  static Schedule round_robin() { return {Kind::RoundRobin, 0.0}; }
  static Schedule greedy() { return {Kind::Greedy, 0.0}; }
  static Schedule greedy_penalized(double lambda) { return {Kind::GreedyPenalized, lambda}; }
};

struct StopRule {
  double eps = 1e-6;           // threshold on |err_old - err_new|
  bool eps_is_relative = true; // interpret eps as a fraction of the initial MSE
  int max_updates = 500;
};

struct UpdateRecord {
  int update = 0;  // 1-based agent-update index
  int round = 0;
  int agent = 0;
  double train_mse = 0.0;
  std::optional<double> test_mse;
  int leaves = 0;
  long messages = 0;      // exchanged since the previous record
  long scalars_sent = 0;  // instance-length payload scalars since the previous record
};

struct RunMetrics {
  std::vector<UpdateRecord> updates;
  bool converged = false;
  std::vector<std::string> warnings;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static RunMetrics read_csv(std::istream& in);
};

// An agent's accumulated additive estimator: the trees it committed, with the
// round each one landed in. Tree feature indices are local to `features`.
struct AgentModel {
  int agent_id = 0;
  std::vector<size_t> features;  // global column indices
  std::vector<std::pair<RegressionTree, int>> trees;

  double predict_row(std::span<const double> full_row) const;
  std::string to_json() const;
  static AgentModel from_json(std::string_view text);
};

// sum_j g_j(x_{F_j}) for every row of a column-major matrix.
std::vector<double> predict_ensemble(const std::vector<AgentModel>& models,
                                     const std::vector<std::vector<double>>& columns);

struct RunResult {
  std::vector<AgentModel> models;
  RunMetrics metrics;
  MemoryLedger::Audit audit;
};

struct TransportConfig {
  enum class Carrier { InProcess, LocalSocket };
  Carrier carrier = Carrier::InProcess;
  uint16_t port_base = 0;
};

struct CandidateFit {
  int agent = 0;
  double post_fit_sse = 0.0;
  int leaves = 0;
};

// RoundRobin cycles from previous_agent; Greedy takes the minimum post-fit
// SSE; GreedyPenalized minimizes SSE + lambda * leaves. Ties go to the lowest
// agent id.
int select_agent(const Schedule& schedule, int previous_agent, int agent_count,
                 const std::vector<CandidateFit>& candidates);

// The ICEA loop over an already-built transport (agents must match assign).
RunResult run_icea(const Dataset& train, const Dataset* test,
                   const FeatureAssignment& assign, const Schedule& schedule,
                   const StopRule& stop, Transport& transport);

// Convenience overload that builds the carrier.
RunResult run_icea(const Dataset& train, const Dataset* test,
                   const FeatureAssignment& assign, const Schedule& schedule,
                   const StopRule& stop, const TreeParams& params,
                   const TransportConfig& config = {}, double shrinkage = 1.0);

// Single agent with every feature; the same loop, so it matches ICEA with a
// D = 1 assignment update for update.
RunResult run_l2_boosting(const Dataset& train, const Dataset* test,
                          const TreeParams& params, const StopRule& stop,
                          const TransportConfig& config = {}, double shrinkage = 1.0);

// Non-cooperative baseline: agents fit y independently, then the fusion
// center boosts over the D-column matrix of their predictions.
struct HierarchicalResult {
  std::vector<AgentModel> stage1;  // features are global column indices
  AgentModel stage2;               // features index the stage-1 prediction columns
  RunMetrics metrics;              // stage-2 sequence; train MSE is the composed MSE
  std::vector<RunMetrics> stage1_metrics;
};

HierarchicalResult run_hierarchical(const Dataset& train, const Dataset* test,
                                    const FeatureAssignment& assign,
                                    const TreeParams& params, const StopRule& stop,
                                    double shrinkage = 1.0);

std::vector<double> predict_hierarchical(const HierarchicalResult& model,
                                         const std::vector<std::vector<double>>& columns);

}  // namespace icea

#endif
