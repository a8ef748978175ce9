#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qrc::harness {

// One trained fit: grid point (N, K_L), repetition, empirical errors and the
// replica values for that grid point. kept = 0 means all original features.
struct ResultRow {
  std::string experiment;
  std::size_t samples = 0;
  std::size_t kept = 0;
  std::size_t repetition = 0;
  double eps_t = 0.0;
  double eps_g = 0.0;
  double replica_t = 0.0;
  double replica_g = 0.0;
  std::string regime;
  std::uint64_t seed = 0;
};

struct AggregateRow {
  std::string experiment;
  std::size_t samples = 0;
  std::size_t kept = 0;
  std::string metric;  // "eps_t" or "eps_g"
  std::size_t count = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample stddev / sqrt(count); nan for count = 1
  double replica = 0.0;
  std::string regime;
};

struct ResultTable {
  std::vector<ResultRow> raw;
  std::vector<AggregateRow> aggregates;
};

// Groups consecutive-or-not rows by (experiment, N, K_L) in first-appearance
// order and emits eps_t then eps_g aggregates per group.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& raw);

// CSV with a "# qrc-results v1" schema line. Doubles use 17 significant digits
// so a read/write cycle is lossless.
void write_raw_csv(std::ostream& out, const std::vector<ResultRow>& raw);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
std::vector<ResultRow> read_raw_csv(std::istream& in);
void write_table_json(std::ostream& out, const ResultTable& table);

}  // namespace qrc::harness
