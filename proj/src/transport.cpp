#include "icea/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

namespace icea {

namespace {

std::vector<std::vector<double>> slice_columns(const Dataset& train,
                                               const std::vector<size_t>& features) {
  std::vector<std::vector<double>> cols;
  cols.reserve(features.size());
  for (size_t f : features) cols.push_back(train.columns[f]);
  return cols;
}

uint64_t run_id_of(const Message& m) {
  if (const auto* fit = std::get_if<FitRequest>(&m)) return fit->run_id;
  if (const auto* fitr = std::get_if<FitResponse>(&m)) return fitr->run_id;
  if (const auto* pr = std::get_if<PredictRequest>(&m)) return pr->run_id;
  if (const auto* prr = std::get_if<PredictResponse>(&m)) return prr->run_id;
  return 0;
}

}  // namespace

AgentWorker::AgentWorker(int id, std::vector<size_t> features,
                         std::vector<std::vector<double>> columns, TreeParams params,
                         double shrinkage, MemoryLedger* ledger)
    : id_(id),
      features_(std::move(features)),
      columns_(std::move(columns)),
      params_(params),
      shrinkage_(shrinkage),
      ledger_(ledger),
      columns_block_(ledger, id, MemoryLedger::Pool::Protocol,
                     static_cast<long>(features_.size()) * static_cast<long>(rows())) {}

Message AgentWorker::handle(const Message& request) {
  const long n = static_cast<long>(rows());

  if (const auto* fit = std::get_if<FitRequest>(&request)) {
    if (fit->residual.size() != rows())
      throw ProtocolError("fit_request: residual length " +
                          std::to_string(fit->residual.size()) + " != n " +
                          std::to_string(rows()));
    // residual snapshot + delta buffer
    auto snapshot = ledger_->track(id_, MemoryLedger::Pool::Protocol, n);
    RegressionTree tree = RegressionTree::fit(columns_, fit->residual, params_);
    if (shrinkage_ != 1.0) tree.scale_leaves(shrinkage_);
    auto delta_block = ledger_->track(id_, MemoryLedger::Pool::Protocol, n);
    std::vector<double> delta = tree.predict_columns(columns_);
    FitResponse resp{fit->run_id, std::move(delta), tree.to_json(), tree.leaf_count()};
    if (fit->commit) trees_.push_back(std::move(tree));
    return resp;
  }

  if (const auto* pred = std::get_if<PredictRequest>(&request)) {
    long block_scalars = 0;
    for (const auto& row : pred->rows) {
      if (row.size() != features_.size())
        throw ProtocolError("predict_request: row width " + std::to_string(row.size()) +
                            " != agent features " + std::to_string(features_.size()));
      block_scalars += static_cast<long>(row.size());
    }
    auto block = ledger_->track(id_, MemoryLedger::Pool::Evaluation,
                                block_scalars + static_cast<long>(pred->rows.size()));
    std::vector<double> values(pred->rows.size(), 0.0);
    for (const auto& tree : trees_)
      for (size_t i = 0; i < pred->rows.size(); ++i)
        values[i] += tree.predict_row(pred->rows[i]);
    return PredictResponse{pred->run_id, std::move(values)};
  }

  if (std::holds_alternative<Shutdown>(request)) return Shutdown{};
  throw ProtocolError("agent received a response-type message");
}

Message Transport::exchange(int agent, const Message& request) {
  if (agent < 0 || agent >= agent_count())
    throw TransportError("exchange: no such agent " + std::to_string(agent));
  Message response = deliver(agent, request);
  counters_.messages += 2;
  counters_.scalars += message_scalar_count(request) + message_scalar_count(response);
  if (run_id_of(response) != run_id_of(request))
    throw ProtocolError("response run id does not echo the request");
  if (tap_) tap_(agent, request, response);
  return response;
}

namespace {

class InProcessTransport final : public Transport {
public:
  InProcessTransport(const Dataset& train, const FeatureAssignment& assign,
                     const TreeParams& params, double shrinkage) {
    for (size_t j = 0; j < assign.agents(); ++j) {
      agent_features_.push_back(assign.agent_features[j]);
      workers_.emplace_back(static_cast<int>(j), assign.agent_features[j],
                            slice_columns(train, assign.agent_features[j]), params,
                            shrinkage, &ledger_);
    }
  }

  void shutdown() override {}

protected:
  Message deliver(int agent, const Message& request) override {
    return workers_[agent].handle(request);
  }

private:
  std::vector<AgentWorker> workers_;
};

// ---- loopback socket carrier ----

void write_all(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    ssize_t k = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (k <= 0) throw TransportError("socket send failed: " + std::string(strerror(errno)));
    off += static_cast<size_t>(k);
  }
}

// Reads one newline-terminated frame; false on clean EOF at a frame boundary.
bool read_frame(int fd, std::string& buffer, std::string& line) {
  while (true) {
    auto nl = buffer.find('\n');
    if (nl != std::string::npos) {
      line = buffer.substr(0, nl + 1);
      buffer.erase(0, nl + 1);
      return true;
    }
    char chunk[4096];
    ssize_t k = ::recv(fd, chunk, sizeof(chunk), 0);
    if (k == 0) {
      if (!buffer.empty()) throw TransportError("connection closed mid-frame");
      return false;
    }
    if (k < 0) throw TransportError("socket recv failed: " + std::string(strerror(errno)));
    buffer.append(chunk, static_cast<size_t>(k));
  }
}

class LocalSocketTransport final : public Transport {
public:
  LocalSocketTransport(const Dataset& train, const FeatureAssignment& assign,
                       const TreeParams& params, double shrinkage, uint16_t port_base) {
    endpoints_.resize(assign.agents());
    for (size_t j = 0; j < assign.agents(); ++j) {
      agent_features_.push_back(assign.agent_features[j]);
      workers_.push_back(std::make_unique<AgentWorker>(
          static_cast<int>(j), assign.agent_features[j],
          slice_columns(train, assign.agent_features[j]), params, shrinkage, &ledger_));

      Endpoint& ep = endpoints_[j];
      ep.listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (ep.listen_fd < 0) throw TransportError("socket() failed");
      int yes = 1;
      ::setsockopt(ep.listen_fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      addr.sin_port = htons(port_base == 0 ? 0 : static_cast<uint16_t>(port_base + j));
      if (::bind(ep.listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw TransportError("bind failed: " + std::string(strerror(errno)));
      if (::listen(ep.listen_fd, 1) != 0) throw TransportError("listen failed");
      socklen_t len = sizeof(addr);
      ::getsockname(ep.listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
      ep.port = ntohs(addr.sin_port);
    }

    for (size_t j = 0; j < assign.agents(); ++j)
      endpoints_[j].server = std::thread(&LocalSocketTransport::serve, this, j);

    for (size_t j = 0; j < assign.agents(); ++j) {
      Endpoint& ep = endpoints_[j];
      ep.client_fd = ::socket(AF_INET, SOCK_STREAM, 0);
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      addr.sin_port = htons(ep.port);
      if (::connect(ep.client_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw TransportError("connect failed: " + std::string(strerror(errno)));
    }
  }

  ~LocalSocketTransport() override {
    try {
      shutdown();
    } catch (...) {
    }
  }

  void shutdown() override {
    for (auto& ep : endpoints_) {
      if (ep.client_fd >= 0) {
        try {
          write_all(ep.client_fd, encode_message(Shutdown{}));
        } catch (...) {
        }
        ::close(ep.client_fd);
        ep.client_fd = -1;
      }
      if (ep.server.joinable()) ep.server.join();
      if (ep.listen_fd >= 0) {
        ::close(ep.listen_fd);
        ep.listen_fd = -1;
      }
    }
  }

protected:
  Message deliver(int agent, const Message& request) override {
    Endpoint& ep = endpoints_[agent];
    if (ep.client_fd < 0) throw TransportError("transport already shut down");
    write_all(ep.client_fd, encode_message(request));
    std::string line;
    if (!read_frame(ep.client_fd, ep.read_buffer, line))
      throw TransportError("agent closed the connection");
    return decode_message(line);
  }

private:
  struct Endpoint {
    int listen_fd = -1;
    int client_fd = -1;
    uint16_t port = 0;
    std::thread server;
    std::string read_buffer;
  };

  void serve(size_t j) {
    int conn = ::accept(endpoints_[j].listen_fd, nullptr, nullptr);
    if (conn < 0) return;
    std::string buffer, line;
    try {
      while (read_frame(conn, buffer, line)) {
        Message request = decode_message(line);
        if (std::holds_alternative<Shutdown>(request)) break;
        Message response = workers_[j]->handle(request);
        write_all(conn, encode_message(response));
      }
    } catch (...) {
      // surface as a transport failure on the fusion side via the closed socket
    }
    ::close(conn);
  }

  std::vector<std::unique_ptr<AgentWorker>> workers_;
  std::vector<Endpoint> endpoints_;
};

}  // namespace

std::unique_ptr<Transport> make_in_process_transport(const Dataset& train,
                                                     const FeatureAssignment& assign,
                                                     const TreeParams& params,
                                                     double shrinkage) {
  assign.validate(train.features());
  return std::make_unique<InProcessTransport>(train, assign, params, shrinkage);
}

std::unique_ptr<Transport> make_local_socket_transport(const Dataset& train,
                                                       const FeatureAssignment& assign,
                                                       const TreeParams& params,
                                                       double shrinkage,
                                                       uint16_t port_base) {
  assign.validate(train.features());
  return std::make_unique<LocalSocketTransport>(train, assign, params, shrinkage, port_base);
}

}  // namespace icea
