#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qrc/random.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/task.hpp"

namespace qrc {

// Outcome counts of S measurement shots for one input. The noisy features
// X_k = counts_k / S are derived on demand, never stored.
struct ShotRecord {
  std::vector<std::uint32_t> counts;
  std::uint32_t shots = 0;

  std::size_t size() const noexcept { return counts.size(); }
  Eigen::VectorXd noisy_features() const;
};

// S categorical draws from x by inverse CDF on an extended-precision cumulative vector.
ShotRecord sample_shots(const FeatureVector& x, std::uint32_t shots, RandomStream& stream);

// Single-shot covariance diag(x) - x x^T.
Eigen::MatrixXd noise_covariance(const FeatureVector& x);

// Training set: inputs u_n, their shot records, and target values f*(u_n).
struct Dataset {
  std::vector<double> inputs;
  std::vector<ShotRecord> records;
  std::vector<double> targets;
  std::uint64_t master_seed = 0;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t dimension() const noexcept { return records.empty() ? 0 : records.front().size(); }
  // N x K matrix whose row n is X(u_n).
  Eigen::MatrixXd feature_matrix() const;
  Eigen::VectorXd target_vector() const;
};

// Input n is drawn from the stream derive_seed(master_seed, {0}) sequence and its
// shots from the substream derive_seed(master_seed, {1, n}).
Dataset generate_dataset(const Reservoir& reservoir, const InputDistribution& dist, std::size_t n,
                         std::uint32_t shots, const Target& target, std::uint64_t master_seed);

// CSV with columns n,u,count_0..count_{K-1},target after one "# qrc-dataset v1 seed=<s>" line.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);

}  // namespace qrc
