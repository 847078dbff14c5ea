#ifndef ICEA_TRANSPORT_HPP
#define ICEA_TRANSPORT_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "icea/dataset.hpp"
#include "icea/ledger.hpp"
#include "icea/message.hpp"
#include "icea/tree.hpp"

namespace icea {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One agent: owns its feature columns and its committed trees, answers fit
// and predict requests. Never sends feature values back.
class AgentWorker {
public:
  AgentWorker(int id, std::vector<size_t> features,
              std::vector<std::vector<double>> columns, TreeParams params,
              double shrinkage, MemoryLedger* ledger);

  Message handle(const Message& request);

  int id() const { return id_; }
  const std::vector<size_t>& features() const { return features_; }
  size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

private:
  int id_;
  std::vector<size_t> features_;
  std::vector<std::vector<double>> columns_;
  TreeParams params_;
  double shrinkage_;
  MemoryLedger* ledger_;
  MemoryLedger::Block columns_block_;
  std::vector<RegressionTree> trees_;
};

struct ExchangeCounters {
  long messages = 0;
  long scalars = 0;
};

// Carrier for the fusion <-> agent exchange. One logical request in flight
// per agent; every exchange counts both frames and their scalar payloads.
class Transport {
public:
  virtual ~Transport() = default;

  Message exchange(int agent, const Message& request);
  virtual void shutdown() = 0;

  int agent_count() const { return static_cast<int>(agent_features_.size()); }
  const std::vector<size_t>& agent_features(int j) const { return agent_features_[j]; }
  const ExchangeCounters& counters() const { return counters_; }
  MemoryLedger& ledger() { return ledger_; }

  using Tap = std::function<void(int agent, const Message& request, const Message& response)>;
  void set_tap(Tap tap) { tap_ = std::move(tap); }

protected:
  virtual Message deliver(int agent, const Message& request) = 0;

  std::vector<std::vector<size_t>> agent_features_;
  ExchangeCounters counters_;
  MemoryLedger ledger_;
  Tap tap_;
};

// Direct in-process delivery; message values cross unchanged.
std::unique_ptr<Transport> make_in_process_transport(const Dataset& train,
                                                     const FeatureAssignment& assign,
                                                     const TreeParams& params,
                                                     double shrinkage = 1.0);

// Loopback stream sockets, one listener per agent, newline-delimited frames.
// port_base 0 lets the OS pick free ports; otherwise agent j listens on
// port_base + j.
std::unique_ptr<Transport> make_local_socket_transport(const Dataset& train,
                                                       const FeatureAssignment& assign,
                                                       const TreeParams& params,
                                                       double shrinkage = 1.0,
                                                       uint16_t port_base = 0);

}  // namespace icea

#endif
