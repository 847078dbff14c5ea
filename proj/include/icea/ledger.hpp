#ifndef ICEA_LEDGER_HPP
#define ICEA_LEDGER_HPP

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace icea {

// Scalar-slot accounting for every instance-length vector a party holds.
// The protocol pool covers the training exchange (the fusion center may keep
// one residual vector plus one scratch vector; an agent its own columns plus
// a residual snapshot and a delta buffer). Serving-time buffers (test-block
// fan-out) land in the evaluation pool, which the audit reports but does not
// bound. Model parameters are not instance-scaled and are not counted.
class MemoryLedger {
public:
  enum class Pool { Protocol, Evaluation };
  static constexpr int kFusion = -1;  // party ids: -1 fusion, >= 0 agent
  static constexpr long kOverheadSlots = 64;

  void add(int party, Pool pool, long slots);
  void sub(int party, Pool pool, long slots);
  long current(int party, Pool pool) const;
  long peak(int party, Pool pool) const;

  // RAII tracking of one allocation.
  class Block {
  public:
    Block() = default;
    Block(MemoryLedger* ledger, int party, Pool pool, long slots)
        : ledger_(ledger), party_(party), pool_(pool), slots_(slots) {
      if (ledger_) ledger_->add(party_, pool_, slots_);
    }
    Block(Block&& o) noexcept { *this = std::move(o); }
    Block& operator=(Block&& o) noexcept {
      release();
      ledger_ = o.ledger_;
      party_ = o.party_;
      pool_ = o.pool_;
      slots_ = o.slots_;
      o.ledger_ = nullptr;
      return *this;
    }
    Block(const Block&) = delete;
    Block& operator=(const Block&) = delete;
    ~Block() { release(); }
    void release() {
      if (ledger_) ledger_->sub(party_, pool_, slots_);
      ledger_ = nullptr;
    }

  private:
    MemoryLedger* ledger_ = nullptr;
    int party_ = 0;
    Pool pool_ = Pool::Protocol;
    long slots_ = 0;
  };

  Block track(int party, Pool pool, long slots) { return Block(this, party, pool, slots); }

  struct Audit {
    bool pass = false;
    long fusion_protocol_peak = 0;
    std::vector<std::string> lines;
    std::string report() const;
  };

  // pass iff fusion protocol peak <= 2n + C and each agent's protocol peak
  // <= (|F_j| + 2) n + C.
  Audit audit(size_t n, const std::vector<size_t>& agent_feature_counts) const;

private:
  mutable std::mutex mu_;
  struct Usage {
    long current = 0;
    long peak = 0;
  };
  std::map<std::pair<int, Pool>, Usage> usage_;
};

}  // namespace icea

#endif
