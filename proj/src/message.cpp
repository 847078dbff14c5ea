#include "icea/message.hpp"

#include <cmath>

#include "icea/textio.hpp"
#include "json.hpp"

namespace icea {

namespace {

void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("encode_message: non-finite real");
  out += format_double(v);
}

void append_vector(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    append_double(out, v[i]);
  }
  out += ']';
}

void append_string(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

std::vector<double> finite_vector(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw ProtocolError(std::string("expected array for ") + field);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ProtocolError(std::string("non-numeric entry in ") + field);
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ProtocolError(std::string("non-finite entry in ") + field);
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::string encode_message(const Message& m) {
  std::string out;
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, FitRequest>) {
          out += "{\"type\":\"fit_request\",\"run_id\":" + std::to_string(msg.run_id);
          out += ",\"commit\":";
          out += msg.commit ? "true" : "false";
          out += ",\"residual\":";
          append_vector(out, msg.residual);
          out += '}';
        } else if constexpr (std::is_same_v<T, FitResponse>) {
          out += "{\"type\":\"fit_response\",\"run_id\":" + std::to_string(msg.run_id);
          out += ",\"delta_predictions\":";
          append_vector(out, msg.delta_predictions);
          out += ",\"model_summary\":";
          append_string(out, msg.model_summary);
          out += ",\"leaves\":" + std::to_string(msg.leaves);
          out += '}';
        } else if constexpr (std::is_same_v<T, PredictRequest>) {
          out += "{\"type\":\"predict_request\",\"run_id\":" + std::to_string(msg.run_id);
          out += ",\"rows\":[";
          for (size_t i = 0; i < msg.rows.size(); ++i) {
            if (i) out += ',';
            append_vector(out, msg.rows[i]);
          }
          out += "]}";
        } else if constexpr (std::is_same_v<T, PredictResponse>) {
          out += "{\"type\":\"predict_response\",\"run_id\":" + std::to_string(msg.run_id);
          out += ",\"values\":";
          append_vector(out, msg.values);
          out += '}';
        } else {
          out += "{\"type\":\"shutdown\"}";
        }
      },
      m);
  out += '\n';
  return out;
}

Message decode_message(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ProtocolError("record has no type field");
  const std::string type = j.at("type").get<std::string>();

  try {
    if (type == "fit_request") {
      FitRequest m;
      m.run_id = j.at("run_id").get<uint64_t>();
      m.commit = j.at("commit").get<bool>();
      m.residual = finite_vector(j.at("residual"), "residual");
      return m;
    }
    if (type == "fit_response") {
      FitResponse m;
      m.run_id = j.at("run_id").get<uint64_t>();
      m.delta_predictions = finite_vector(j.at("delta_predictions"), "delta_predictions");
      m.model_summary = j.at("model_summary").get<std::string>();
      m.leaves = j.at("leaves").get<int>();
      return m;
    }
    if (type == "predict_request") {
      PredictRequest m;
      m.run_id = j.at("run_id").get<uint64_t>();
      const auto& rows = j.at("rows");
      if (!rows.is_array()) throw ProtocolError("rows must be an array");
      for (const auto& row : rows) m.rows.push_back(finite_vector(row, "rows"));
      return m;
    }
    if (type == "predict_response") {
      PredictResponse m;
      m.run_id = j.at("run_id").get<uint64_t>();
      m.values = finite_vector(j.at("values"), "values");
      return m;
    }
    if (type == "shutdown") return Shutdown{};
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad field: ") + e.what());
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

long message_scalar_count(const Message& m) {
  return std::visit(
      [](const auto& msg) -> long {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, FitRequest>) {
          return static_cast<long>(msg.residual.size());
        } else if constexpr (std::is_same_v<T, FitResponse>) {
          return static_cast<long>(msg.delta_predictions.size());
        } else if constexpr (std::is_same_v<T, PredictRequest>) {
          long total = 0;
          for (const auto& row : msg.rows) total += static_cast<long>(row.size());
          return total;
        } else if constexpr (std::is_same_v<T, PredictResponse>) {
          return static_cast<long>(msg.values.size());
        } else {
          return 0;
        }
      },
      m);
}

}  // namespace icea
