#include "qrc/harness/result_table.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "json.hpp"
#include "qrc/error.hpp"

namespace qrc::harness {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

AggregateRow summarize(const std::vector<const ResultRow*>& group, const std::string& metric) {
  const bool training = metric == "eps_t";
  AggregateRow row;
  row.experiment = group.front()->experiment;
  row.samples = group.front()->samples;
  row.kept = group.front()->kept;
  row.metric = metric;
  row.count = group.size();
  row.replica = training ? group.front()->replica_t : group.front()->replica_g;
  row.regime = group.front()->regime;
  double sum = 0.0;
  for (const ResultRow* r : group) sum += training ? r->eps_t : r->eps_g;
  row.mean = sum / static_cast<double>(group.size());
  if (group.size() > 1) {
    double ss = 0.0;
    for (const ResultRow* r : group) {
      const double d = (training ? r->eps_t : r->eps_g) - row.mean;
      ss += d * d;
    }
    const double n = static_cast<double>(group.size());
    row.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  } else {
    row.standard_error = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& raw) {
  using Key = std::tuple<std::string, std::size_t, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : raw) {
    Key key{r.experiment, r.samples, r.kept};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<AggregateRow> out;
  out.reserve(2 * order.size());
  for (const Key& key : order) {
    out.push_back(summarize(groups[key], "eps_t"));
    out.push_back(summarize(groups[key], "eps_g"));
  }
  return out;
}

void write_raw_csv(std::ostream& out, const std::vector<ResultRow>& raw) {
  out << "# qrc-results v1 raw\n";
  out << "experiment,N,K_L,repetition,eps_t,eps_g,replica_E_t,replica_E_g,regime,seed\n";
  for (const ResultRow& r : raw) {
    out << r.experiment << ',' << r.samples << ',' << r.kept << ',' << r.repetition << ',' << num(r.eps_t) << ','
        << num(r.eps_g) << ',' << num(r.replica_t) << ',' << num(r.replica_g) << ',' << r.regime << ',' << r.seed
        << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "# qrc-results v1 aggregate\n";
  out << "experiment,N,K_L,metric,count,mean,stderr,replica,regime\n";
  for (const AggregateRow& r : rows) {
    out << r.experiment << ',' << r.samples << ',' << r.kept << ',' << r.metric << ',' << r.count << ','
        << num(r.mean) << ',' << num(r.standard_error) << ',' << num(r.replica) << ',' << r.regime << '\n';
  }
}

std::vector<ResultRow> read_raw_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("experiment,", 0) == 0) continue;
    std::vector<std::string> f;
    std::istringstream s(line);
    for (std::string field; std::getline(s, field, ',');) f.push_back(field);
    if (f.size() != 10) throw ValidationError("results csv: expected 10 columns, got " + std::to_string(f.size()));
    ResultRow r;
    r.experiment = f[0];
    r.samples = std::stoull(f[1]);
    r.kept = std::stoull(f[2]);
    r.repetition = std::stoull(f[3]);
    r.eps_t = std::stod(f[4]);
    r.eps_g = std::stod(f[5]);
    r.replica_t = std::stod(f[6]);
    r.replica_g = std::stod(f[7]);
    r.regime = f[8];
    r.seed = std::stoull(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_table_json(std::ostream& out, const ResultTable& table) {
  // JSON has no inf/nan; those become null.
  const auto value = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["format"] = "qrc-results v1";
  j["raw"] = nlohmann::json::array();
  for (const ResultRow& r : table.raw) {
    j["raw"].push_back({{"experiment", r.experiment}, {"N", r.samples}, {"K_L", r.kept}, {"repetition", r.repetition},
                        {"eps_t", value(r.eps_t)}, {"eps_g", value(r.eps_g)}, {"replica_E_t", value(r.replica_t)},
                        {"replica_E_g", value(r.replica_g)}, {"regime", r.regime}, {"seed", r.seed}});
  }
  j["aggregate"] = nlohmann::json::array();
  for (const AggregateRow& r : table.aggregates) {
    j["aggregate"].push_back({{"experiment", r.experiment}, {"N", r.samples}, {"K_L", r.kept}, {"metric", r.metric},
                              {"count", r.count}, {"mean", value(r.mean)}, {"stderr", value(r.standard_error)},
                              {"replica", value(r.replica)}, {"regime", r.regime}});
  }
  out << j.dump(1) << '\n';
}

}  // namespace qrc::harness
