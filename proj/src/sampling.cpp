#include "qrc/sampling.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "qrc/error.hpp"

namespace qrc {

Eigen::VectorXd ShotRecord::noisy_features() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    x(static_cast<Eigen::Index>(k)) = static_cast<double>(counts[k]) / static_cast<double>(shots);
  }
  return x;
}

ShotRecord sample_shots(const FeatureVector& x, std::uint32_t shots, RandomStream& stream) {
  check_simplex(x);
  if (shots == 0) throw ValidationError("sample_shots: shot count must be positive");

  const std::size_t dim = x.size();
  std::vector<long double> cumulative(dim);
  long double running = 0.0L;
  for (std::size_t k = 0; k < dim; ++k) {
    running += std::max(0.0, x[k]);
    cumulative[k] = running;
  }
  const long double total = cumulative.back();

  ShotRecord record{std::vector<std::uint32_t>(dim, 0), shots};
  for (std::uint32_t s = 0; s < shots; ++s) {
    const long double draw = static_cast<long double>(stream.uniform()) * total;
    // First k with cumulative[k] > draw; zero-probability outcomes are never hit.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), draw);
    if (it == cumulative.end()) --it;
    ++record.counts[static_cast<std::size_t>(it - cumulative.begin())];
  }
  return record;
}

Eigen::MatrixXd noise_covariance(const FeatureVector& x) {
  check_simplex(x);
  Eigen::MatrixXd sigma = -x.values * x.values.transpose();
  sigma.diagonal() += x.values;
  return sigma;
}

Eigen::MatrixXd Dataset::feature_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  const auto k = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd phi(n, k);
  for (Eigen::Index i = 0; i < n; ++i) phi.row(i) = records[static_cast<std::size_t>(i)].noisy_features().transpose();
  return phi;
}

Eigen::VectorXd Dataset::target_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
}

Dataset generate_dataset(const Reservoir& reservoir, const InputDistribution& dist, std::size_t n,
                         std::uint32_t shots, const Target& target, std::uint64_t master_seed) {
  dist.validate();
  if (n == 0) throw ValidationError("generate_dataset: N must be >= 1");
  if (shots == 0) throw ValidationError("generate_dataset: S must be >= 1");

  Dataset ds;
  ds.master_seed = master_seed;
  ds.inputs.reserve(n);
  ds.records.reserve(n);
  ds.targets.reserve(n);
  RandomStream input_stream(derive_seed(master_seed, {0}));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = dist.sample(input_stream);
    RandomStream shot_stream(derive_seed(master_seed, {1, i}));
    ds.inputs.push_back(u);
    ds.records.push_back(sample_shots(reservoir.features(u), shots, shot_stream));
    ds.targets.push_back(target(u));
  }
  return ds;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  out << "# qrc-dataset v1 seed=" << dataset.master_seed << '\n';
  out << "n,u";
  for (std::size_t k = 0; k < dataset.dimension(); ++k) out << ",count_" << k;
  out << ",target\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << i << ',' << fmt::format("{:.17g}", dataset.inputs[i]);
    for (std::uint32_t c : dataset.records[i].counts) out << ',' << c;
    out << ',' << fmt::format("{:.17g}", dataset.targets[i]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("seed=");
      if (pos != std::string::npos) ds.master_seed = std::stoull(line.substr(pos + 5));
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string field; std::getline(row, field, ',');) fields.push_back(field);
    if (fields.size() < 4) throw ValidationError("dataset csv: too few columns");
    if (fields[0] == "n") {
      columns = fields.size();
      continue;
    }
    if (columns == 0 || fields.size() != columns) throw ValidationError("dataset csv: missing header or ragged row");
    ShotRecord record;
    std::uint64_t total = 0;
    for (std::size_t c = 2; c + 1 < fields.size(); ++c) {
      const unsigned long count = std::stoul(fields[c]);
      record.counts.push_back(static_cast<std::uint32_t>(count));
      total += count;
    }
    if (total == 0) throw ValidationError("dataset csv: row with zero shots");
    record.shots = static_cast<std::uint32_t>(total);
    ds.inputs.push_back(std::stod(fields[1]));
    ds.records.push_back(std::move(record));
    ds.targets.push_back(std::stod(fields.back()));
  }
  return ds;
}

}  // namespace qrc
