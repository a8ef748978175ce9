#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qrc {

struct Interval {
  double lower = -1.0;
  double upper = 1.0;
};

// Random driven Ising chain:
//   H0 = sum_<l,l'> J sz_l sz_l' + sum_l (hx_l sx_l + hz_l sz_l),  H1 = sum_l hI_l sx_l
// on an open nearest-neighbour chain, with fields drawn uniformly from the intervals.
struct ReservoirSpec {
  int qubits = 4;
  double coupling = 1.0;
  Interval hx_range{-1.0, 1.0};
  Interval hz_range{-1.0, 1.0};
  Interval hI_range{-1.0, 1.0};
  double tau = 10.0;
  std::uint64_t seed = 1;
  int max_qubits = 12;

  // Throws ValidationError (DimensionOverflow for qubits > max_qubits).
  void validate() const;
};

// Probabilities x_k(u) of the computational-basis outcomes.
struct FeatureVector {
  Eigen::VectorXd values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t k) const { return values(static_cast<Eigen::Index>(k)); }
};

// Throws ValidationError unless x is a probability vector within tolerance.
void check_simplex(const FeatureVector& x, double tolerance = 1e-9);

class Reservoir {
 public:
  Reservoir(Eigen::MatrixXcd h0, Eigen::MatrixXcd h1, double tau, Eigen::VectorXcd initial_state);

  const Eigen::MatrixXcd& drift() const noexcept { return h0_; }
  const Eigen::MatrixXcd& drive() const noexcept { return h1_; }
  const Eigen::VectorXcd& initial_state() const noexcept { return psi0_; }
  double tau() const noexcept { return tau_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(h0_.rows()); }

  // x_k(u) = |<k| exp(-i tau (H0 + u H1)) |psi0>|^2 via Hermitian eigendecomposition.
  FeatureVector features(double u) const;

  // Field draws, kept for provenance.
  std::vector<double> hx, hz, hI;

 private:
  Eigen::MatrixXcd h0_;
  Eigen::MatrixXcd h1_;
  double tau_;
  Eigen::VectorXcd psi0_;
};

Reservoir build_reservoir(const ReservoirSpec& spec);

inline FeatureVector features(const Reservoir& reservoir, double u) { return reservoir.features(u); }

// Largest |A - A^H| entry.
double hermitian_deviation(const Eigen::MatrixXcd& a);

}  // namespace qrc
