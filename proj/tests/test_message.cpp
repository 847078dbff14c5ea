#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "icea/message.hpp"
#include "icea/rng.hpp"

using namespace icea;

TEST_CASE("shutdown encodes to the bare record") {
  CHECK(encode_message(Shutdown{}) == "{\"type\":\"shutdown\"}\n");
}

TEST_CASE("fit_request renders reals in shortest round-trip form") {
  FitRequest m{7, true, {1.0, 0.5}};
  std::string wire = encode_message(m);
  CHECK(wire.find("\"residual\":[1,0.5]") != std::string::npos);
  CHECK(wire.back() == '\n');
  CHECK(decode_message(wire) == Message{m});
}

TEST_CASE("every variant round-trips exactly") {
  std::vector<Message> cases = {
      FitRequest{1, false, {0.1, -2.5e-17, 3.0}},
      FitResponse{2, {1.5, 2.5}, "{\"type\":\"leaf\",\"value\":0.25}", 1},
      PredictRequest{3, {{1.0, 2.0}, {3.0, 4.0}}},
      PredictResponse{4, {0.0, -0.0, 1e300}},
      Shutdown{},
  };
  for (const auto& m : cases) CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("randomized fit responses round-trip") {
  CounterRng rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    FitResponse m;
    m.run_id = rng.next_u64();
    size_t n = rng.next_below(40);
    for (size_t i = 0; i < n; ++i) m.delta_predictions.push_back(rng.next_normal() * 1e3);
    m.model_summary = "{\"v\":\"quote \\\" and backslash \\\\\"}";
    m.leaves = static_cast<int>(rng.next_below(32));
    CHECK(decode_message(encode_message(m)) == Message{m});
  }
}

TEST_CASE("non-finite reals are rejected at encode") {
  CHECK_THROWS_AS(encode_message(FitRequest{1, true, {std::nan("")}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(encode_message(PredictResponse{1, {INFINITY}}), std::invalid_argument);
}

TEST_CASE("malformed records raise protocol errors") {
  CHECK_THROWS_AS(decode_message("{\"type\":\"fit_request\",\"run_id\":1"),
                  ProtocolError);  // truncated
  CHECK_THROWS_AS(decode_message("{\"type\":\"warp\"}"), ProtocolError);
  CHECK_THROWS_AS(decode_message("{\"run_id\":3}"), ProtocolError);
  CHECK_THROWS_AS(decode_message("{\"type\":\"fit_request\",\"run_id\":1}"),
                  ProtocolError);  // missing fields
  CHECK_THROWS_AS(
      decode_message("{\"type\":\"fit_request\",\"run_id\":1,\"commit\":true,\"residual\":[\"a\"]}"),
      ProtocolError);
}

TEST_CASE("scalar counting covers the instance-length payloads") {
  CHECK(message_scalar_count(FitRequest{1, true, {1, 2, 3}}) == 3);
  CHECK(message_scalar_count(FitResponse{1, {1, 2}, "{}", 1}) == 2);
  CHECK(message_scalar_count(PredictRequest{1, {{1, 2}, {3, 4}, {5, 6}}}) == 6);
  CHECK(message_scalar_count(PredictResponse{1, {9}}) == 1);
  CHECK(message_scalar_count(Shutdown{}) == 0);
}
