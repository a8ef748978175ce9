#include "qrc/reservoir.hpp"

#include <cmath>
#include <string>

#include "qrc/error.hpp"
#include "qrc/random.hpp"

namespace qrc {

namespace {

constexpr double kHermitianTolerance = 1e-12;

bool valid_interval(const Interval& i) {
  return std::isfinite(i.lower) && std::isfinite(i.upper) && i.lower <= i.upper;
}

// Site l is bit (L - 1 - l) of the basis index, so site 0 is the leftmost
// factor of the tensor product.
int site_bit(std::size_t index, int site, int qubits) {
  return static_cast<int>((index >> (qubits - 1 - site)) & 1U);
}

}  // namespace

void ReservoirSpec::validate() const {
  if (qubits < 1) throw ValidationError("reservoir: qubit count must be >= 1, got " + std::to_string(qubits));
  if (qubits > max_qubits) {
    throw DimensionOverflow("reservoir: " + std::to_string(qubits) + " qubits exceeds the cap of " +
                            std::to_string(max_qubits));
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("reservoir: tau must be finite and >= 0");
  if (!std::isfinite(coupling)) throw ValidationError("reservoir: coupling J must be finite");
  if (!valid_interval(hx_range) || !valid_interval(hz_range) || !valid_interval(hI_range)) {
    throw ValidationError("reservoir: field intervals need finite lower <= upper");
  }
}

void check_simplex(const FeatureVector& x, double tolerance) {
  if (x.values.size() == 0) throw ValidationError("feature vector is empty");
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.values.size(); ++k) {
    const double p = x.values(k);
    if (!(p >= -tolerance) || !(p <= 1.0 + tolerance)) {
      throw ValidationError("feature vector entry " + std::to_string(k) + " is not a probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) throw ValidationError("feature vector does not sum to 1");
}

double hermitian_deviation(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

Reservoir::Reservoir(Eigen::MatrixXcd h0, Eigen::MatrixXcd h1, double tau, Eigen::VectorXcd initial_state)
    : h0_(std::move(h0)), h1_(std::move(h1)), tau_(tau), psi0_(std::move(initial_state)) {
  if (h0_.rows() == 0 || h0_.rows() != h0_.cols() || h1_.rows() != h0_.rows() || h1_.cols() != h0_.cols() ||
      psi0_.size() != h0_.rows()) {
    throw ValidationError("reservoir: inconsistent Hamiltonian/state dimensions");
  }
  if (hermitian_deviation(h0_) > kHermitianTolerance || hermitian_deviation(h1_) > kHermitianTolerance) {
    throw ValidationError("reservoir: Hamiltonians must be Hermitian");
  }
  if (std::abs(psi0_.norm() - 1.0) > kHermitianTolerance) {
    throw ValidationError("reservoir: initial state must have unit norm");
  }
  if (!(tau_ >= 0.0)) throw ValidationError("reservoir: tau must be >= 0");
}

FeatureVector Reservoir::features(double u) const {
  const Eigen::MatrixXcd h = h0_ + u * h1_;
  if (!std::isfinite(u) || hermitian_deviation(h) > kHermitianTolerance * (1.0 + std::abs(u))) {
    throw NumericalError("reservoir: H(u) is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("reservoir: eigendecomposition of H(u) failed");

  const Eigen::MatrixXcd& modes = solver.eigenvectors();
  Eigen::VectorXcd amplitudes = modes.adjoint() * psi0_;
  const Eigen::VectorXd& energies = solver.eigenvalues();
  for (Eigen::Index j = 0; j < amplitudes.size(); ++j) {
    amplitudes(j) *= std::polar(1.0, -tau_ * energies(j));
  }
  const Eigen::VectorXcd evolved = modes * amplitudes;

  FeatureVector x{evolved.cwiseAbs2()};
  // Unitarity holds to rounding; renormalize so the simplex constraint is exact to ~1 ulp.
  x.values /= x.values.sum();
  return x;
}

Reservoir build_reservoir(const ReservoirSpec& spec) {
  spec.validate();
  const int qubits = spec.qubits;
  const std::size_t dim = std::size_t{1} << qubits;

  RandomStream stream(spec.seed);
  std::vector<double> hx(qubits), hz(qubits), hI(qubits);
  for (int l = 0; l < qubits; ++l) {
    hx[l] = stream.uniform(spec.hx_range.lower, spec.hx_range.upper);
    hz[l] = stream.uniform(spec.hz_range.lower, spec.hz_range.upper);
    hI[l] = stream.uniform(spec.hI_range.lower, spec.hI_range.upper);
  }

  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd h1 = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < dim; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    double diagonal = 0.0;
    for (int l = 0; l + 1 < qubits; ++l) {
      const int zl = 1 - 2 * site_bit(k, l, qubits);
      const int zr = 1 - 2 * site_bit(k, l + 1, qubits);
      diagonal += spec.coupling * zl * zr;
    }
    for (int l = 0; l < qubits; ++l) {
      diagonal += hz[l] * (1 - 2 * site_bit(k, l, qubits));
      const auto flipped = static_cast<Eigen::Index>(k ^ (std::size_t{1} << (qubits - 1 - l)));
      h0(flipped, row) += hx[l];
      h1(flipped, row) += hI[l];
    }
    h0(row, row) += diagonal;
  }

  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(n);
  psi0(0) = 1.0;

  Reservoir reservoir(std::move(h0), std::move(h1), spec.tau, std::move(psi0));
  reservoir.hx = std::move(hx);
  reservoir.hz = std::move(hz);
  reservoir.hI = std::move(hI);
  return reservoir;
}

}  // namespace qrc
