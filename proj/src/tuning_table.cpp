#include "apt/tuning_table.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace apt {

void TuningTable::insert(const ProblemKey& key, const TuningEntry& entry) {
  require_valid(entry.config, key.p, key.q);
  entries_[key] = entry;
}

const TuningEntry* TuningTable::find(const ProblemKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

TuningTable parse_tuning_table(std::istream& in) {
  TuningTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    ProblemKey key;
    TuningEntry e;
    KernelConfig& c = e.config;
    fields >> key.m >> key.n >> key.k >> key.p >> key.q >> c.b_m >> c.b_n >> c.b_k >> c.t_r >>
        c.t_c >> c.w_b >> c.w_m >> c.w_n >> c.w_k >> e.throughput;
    std::string extra;
    if (!fields || (fields >> extra)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) +
                                             ": expected 14 integers and a throughput");
    }
    if (!std::isfinite(e.throughput) || e.throughput < 0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad throughput");
    }
    try {
      table.insert(key, e);
    } catch (const Error& err) {
      throw Error(err.code(), "line " + std::to_string(lineno) + ": " + err.detail());
    }
  }
  return table;
}

void write_tuning_table(std::ostream& out, const TuningTable& table) {
  out << "# M N K p q b_m b_n b_k t_r t_c w_b w_m w_n w_k throughput\n";
  for (const auto& [key, e] : table.entries()) {
    const KernelConfig& c = e.config;
    out << key.m << ' ' << key.n << ' ' << key.k << ' ' << key.p << ' ' << key.q << ' ' << c.b_m
        << ' ' << c.b_n << ' ' << c.b_k << ' ' << c.t_r << ' ' << c.t_c << ' ' << c.w_b << ' '
        << c.w_m << ' ' << c.w_n << ' ' << c.w_k << ' ' << std::setprecision(17) << e.throughput
        << '\n';
  }
}

TuningTable load_tuning_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return parse_tuning_table(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

void save_tuning_table(const std::string& path, const TuningTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  write_tuning_table(out, table);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace apt
