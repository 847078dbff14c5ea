#ifndef ICEA_MESSAGE_HPP
#define ICEA_MESSAGE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace icea {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fusion -> agent: fit the current residual. run_id is a correlation id the
// response must echo. commit=false asks for a candidate fit that the agent
// does not add to its model (greedy schedules probe all agents, then commit
// the winner by repeating the request).
struct FitRequest {
  uint64_t run_id = 0;
  bool commit = true;
  std::vector<double> residual;
  friend bool operator==(const FitRequest&, const FitRequest&) = default;
};

// Agent -> fusion: predictions of the newly fitted tree on the training rows,
// plus the serialized tree for logging. Never carries feature columns.
struct FitResponse {
  uint64_t run_id = 0;
  std::vector<double> delta_predictions;
  std::string model_summary;
  int leaves = 0;
  friend bool operator==(const FitResponse&, const FitResponse&) = default;
};

// Fusion -> agent: a block of query rows restricted to the agent's features.
struct PredictRequest {
  uint64_t run_id = 0;
  std::vector<std::vector<double>> rows;
  friend bool operator==(const PredictRequest&, const PredictRequest&) = default;
};

// Agent -> fusion: the agent's current model evaluated on the block.
struct PredictResponse {
  uint64_t run_id = 0;
  std::vector<double> values;
  friend bool operator==(const PredictResponse&, const PredictResponse&) = default;
};

struct Shutdown {
  friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Message = std::variant<FitRequest, FitResponse, PredictRequest,
                             PredictResponse, Shutdown>;

// One newline-terminated JSON record; reals rendered in shortest round-trip
// form, so decode(encode(m)) == m exactly. Non-finite reals are rejected.
std::string encode_message(const Message& m);
Message decode_message(std::string_view line);

// Instance-length payload scalars carried by the message (residuals, deltas,
// row blocks, values); the communication counters sum these.
long message_scalar_count(const Message& m);

}  // namespace icea

#endif
