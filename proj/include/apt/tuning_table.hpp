#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>

#include "apt/types.hpp"

namespace apt {

struct ProblemKey {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  int p = 0;
  int q = 0;

  auto operator<=>(const ProblemKey&) const = default;
};

struct TuningEntry {
  KernelConfig config;
  double throughput = 0.0;  // ops per second

  friend bool operator==(const TuningEntry&, const TuningEntry&) = default;
};

/// Best measured kernel config per problem key. Every stored config is valid
/// for its key's (p, q).
class TuningTable {
 public:
  void insert(const ProblemKey& key, const TuningEntry& entry);
  const TuningEntry* find(const ProblemKey& key) const;

  const std::map<ProblemKey, TuningEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const TuningTable&, const TuningTable&) = default;

 private:
  std::map<ProblemKey, TuningEntry> entries_;
};

// .apt-table text: one "M N K p q b_m b_n b_k t_r t_c w_b w_m w_n w_k throughput"
// line per entry; lines starting with '#' and blank lines are skipped.
TuningTable parse_tuning_table(std::istream& in);
void write_tuning_table(std::ostream& out, const TuningTable& table);

TuningTable load_tuning_table(const std::string& path);
void save_tuning_table(const std::string& path, const TuningTable& table);

}  // namespace apt
