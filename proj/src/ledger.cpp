#include "icea/ledger.hpp"

#include <sstream>
#include <stdexcept>

namespace icea {

void MemoryLedger::add(int party, Pool pool, long slots) {
  std::lock_guard<std::mutex> lock(mu_);
  Usage& u = usage_[{party, pool}];
  u.current += slots;
  if (u.current > u.peak) u.peak = u.current;
}

void MemoryLedger::sub(int party, Pool pool, long slots) {
  std::lock_guard<std::mutex> lock(mu_);
  Usage& u = usage_[{party, pool}];
  u.current -= slots;
  if (u.current < 0) throw std::logic_error("MemoryLedger: negative allocation");
}

long MemoryLedger::current(int party, Pool pool) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = usage_.find({party, pool});
  return it == usage_.end() ? 0 : it->second.current;
}

long MemoryLedger::peak(int party, Pool pool) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = usage_.find({party, pool});
  return it == usage_.end() ? 0 : it->second.peak;
}

std::string MemoryLedger::Audit::report() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " memory audit\n";
  for (const auto& line : lines) out << "  " << line << "\n";
  return out.str();
}

MemoryLedger::Audit MemoryLedger::audit(size_t n,
                                        const std::vector<size_t>& agent_feature_counts) const {
  Audit a;
  a.pass = true;
  const long ln = static_cast<long>(n);

  auto check = [&](const std::string& who, long observed, long bound) {
    std::ostringstream line;
    bool ok = observed <= bound;
    line << who << ": protocol peak " << observed << " slots, bound " << bound
         << (ok ? " (ok)" : " (EXCEEDED)");
    a.lines.push_back(line.str());
    a.pass = a.pass && ok;
  };

  a.fusion_protocol_peak = peak(kFusion, Pool::Protocol);
  check("fusion", a.fusion_protocol_peak, 2 * ln + kOverheadSlots);
  for (size_t j = 0; j < agent_feature_counts.size(); ++j) {
    long bound = (static_cast<long>(agent_feature_counts[j]) + 2) * ln + kOverheadSlots;
    check("agent " + std::to_string(j), peak(static_cast<int>(j), Pool::Protocol), bound);
  }

  long eval_peak = peak(kFusion, Pool::Evaluation);
  if (eval_peak > 0) {
    a.lines.push_back("fusion: evaluation pool peak " + std::to_string(eval_peak) +
                      " slots (serving-time, unbounded by the protocol)");
  }
  return a;
}

}  // namespace icea
