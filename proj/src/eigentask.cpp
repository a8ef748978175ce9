#include "qrc/eigentask.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "qrc/error.hpp"

namespace qrc {

namespace {

FeatureMap reservoir_map(const Reservoir& reservoir) {
  return [&reservoir](double u) { return reservoir.features(u); };
}

// Orthonormal basis (columns) of the Euclidean complement of g.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& g) {
  const Eigen::Index k = g.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  return q.rightCols(k - 1);
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  if (v(largest) < 0.0) v = -v;
}

// Refines the non-constant columns of r (already close to the solution) so that
// r^T G r = I and r^T V r is diagonal to working precision entry by entry. The
// whitened solve has absolute eigenvalue error ~ eps * beta_max^2, which swamps
// small beta^2 when the Gram matrix is badly conditioned; Jacobi rotations on
// the nearly diagonal projected matrix do not.
void polish(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& noise, Eigen::MatrixXd& r) {
  const Eigen::Index n = r.cols();
  // Modified Gram-Schmidt in the G inner product, lowest noise first.
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) r.col(j) -= r.col(i).dot(gram * r.col(j)) * r.col(i);
    r.col(j) /= std::sqrt(r.col(j).dot(gram * r.col(j)));
  }
  Eigen::MatrixXd m = r.transpose() * noise * r;
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 1; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-18 * std::sqrt(std::abs(m(p, p) * m(q, q))) || apq == 0.0) continue;
        off = std::max(off, std::abs(apq));
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        const Eigen::VectorXd rp = r.col(p), rq = r.col(q);
        r.col(p) = c * rp - s * rq;
        r.col(q) = s * rp + c * rq;
        const Eigen::VectorXd mp = m.col(p), mq = m.col(q);
        m.col(p) = c * mp - s * mq;
        m.col(q) = s * mp + c * mq;
        const Eigen::RowVectorXd np = m.row(p), nq = m.row(q);
        m.row(p) = c * np - s * nq;
        m.row(q) = s * np + c * nq;
      }
    }
    if (off == 0.0) break;
  }
}

}  // namespace

MomentSet moments_on_rule(const FeatureMap& map, const QuadratureRule& rule) {
  if (rule.size() == 0) throw ValidationError("moments: empty quadrature rule");
  const FeatureVector first = map(rule.nodes.front());
  const auto k = static_cast<Eigen::Index>(first.size());

  MomentSet m;
  m.gram = Eigen::MatrixXd::Zero(k, k);
  m.noise = Eigen::MatrixXd::Zero(k, k);
  m.mean = Eigen::VectorXd::Zero(k);
  m.unit = Eigen::VectorXd::Ones(k);
  m.nodes = static_cast<int>(rule.size());

  for (std::size_t i = 0; i < rule.size(); ++i) {
    const FeatureVector x = i == 0 ? first : map(rule.nodes[i]);
    if (static_cast<Eigen::Index>(x.size()) != k) throw ValidationError("moments: feature dimension changed");
    const double w = rule.weights[i];
    const Eigen::MatrixXd outer = x.values * x.values.transpose();
    m.gram.noalias() += w * outer;
    m.mean.noalias() += w * x.values;
    m.noise.noalias() -= w * outer;
    m.noise.diagonal().noalias() += w * x.values;
  }
  m.gram = 0.5 * (m.gram + m.gram.transpose()).eval();
  m.noise = 0.5 * (m.noise + m.noise.transpose()).eval();

  Eigen::MatrixXd identity_check = -m.gram;
  identity_check.diagonal() += m.mean;
  m.identity_residual = (m.noise - identity_check).cwiseAbs().maxCoeff();
  return m;
}

MomentSet compute_moments(const FeatureMap& map, const InputDistribution& dist, const QuadratureSpec& spec) {
  MomentSet m = moments_on_rule(map, expectation_rule(dist, spec));
  if (spec.check_convergence) {
    QuadratureSpec doubled = spec;
    doubled.nodes = 2 * spec.nodes;
    const MomentSet fine = moments_on_rule(map, expectation_rule(dist, doubled));
    const double change = (fine.gram - m.gram).cwiseAbs().maxCoeff();
    if (change > spec.convergence_tolerance) {
      throw NumericalError(fmt::format("moments: quadrature not converged ({} -> {} nodes changes G by {:.3g})",
                                       spec.nodes, doubled.nodes, change));
    }
  }
  return m;
}

MomentSet compute_moments(const Reservoir& reservoir, const InputDistribution& dist, const QuadratureSpec& spec) {
  return compute_moments(reservoir_map(reservoir), dist, spec);
}

EigentaskBasis solve_eigentasks(const MomentSet& moments, double gram_threshold) {
  const Eigen::MatrixXd& gram = moments.gram;
  const Eigen::MatrixXd& noise = moments.noise;
  const Eigen::Index k = gram.rows();
  if (k == 0 || gram.cols() != k || noise.rows() != k || noise.cols() != k || moments.unit.size() != k) {
    throw ValidationError("solve_eigentasks: inconsistent moment dimensions");
  }
  if (!(gram_threshold >= 0.0)) throw ValidationError("solve_eigentasks: gram threshold must be >= 0");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(gram, Eigen::EigenvaluesOnly);
  const double lambda_max = full.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw NumericalError("solve_eigentasks: Gram matrix is numerically zero");
  }

  const Eigen::VectorXd& unit = moments.unit;
  const double unit_norm_sq = unit.dot(gram * unit);
  if (!(unit_norm_sq > 0.0)) throw NumericalError("solve_eigentasks: constant direction has zero norm");
  const Eigen::VectorXd r0 = unit / std::sqrt(unit_norm_sq);

  std::vector<double> beta_sq{std::max(0.0, r0.dot(noise * r0))};
  Eigen::MatrixXd columns(k, 1);
  columns.col(0) = r0;

  if (k > 1) {
    // r is G-orthogonal to the constant eigentask iff (G 1) . r = 0.
    const Eigen::MatrixXd q = complement_basis(gram * unit);
    const Eigen::MatrixXd g_reduced = q.transpose() * gram * q;
    const Eigen::MatrixXd v_reduced = q.transpose() * noise * q;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> whitening(0.5 * (g_reduced + g_reduced.transpose()));
    if (whitening.info() != Eigen::Success) throw NumericalError("solve_eigentasks: Gram eigendecomposition failed");

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = whitening.eigenvalues().size() - 1; i >= 0; --i) {
      if (whitening.eigenvalues()(i) >= gram_threshold * lambda_max && whitening.eigenvalues()(i) > 0.0) kept.push_back(i);
    }
    if (!kept.empty()) {
      Eigen::MatrixXd whiten(q.cols(), static_cast<Eigen::Index>(kept.size()));
      for (std::size_t j = 0; j < kept.size(); ++j) {
        whiten.col(static_cast<Eigen::Index>(j)) =
            whitening.eigenvectors().col(kept[j]) / std::sqrt(whitening.eigenvalues()(kept[j]));
      }
      Eigen::MatrixXd standard = whiten.transpose() * v_reduced * whiten;
      standard = 0.5 * (standard + standard.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum(standard);
      if (spectrum.info() != Eigen::Success) throw NumericalError("solve_eigentasks: noise eigendecomposition failed");

      // Eigen already returns ascending eigenvalues; ties keep the solver's order.
      const Eigen::MatrixXd rest = q * whiten * spectrum.eigenvectors();
      columns.conservativeResize(k, 1 + rest.cols());
      columns.rightCols(rest.cols()) = rest;
      for (Eigen::Index j = 0; j < rest.cols(); ++j) {
        // Rounding can leave O(eps) negatives; the noise matrix is PSD.
        beta_sq.push_back(std::max(0.0, spectrum.eigenvalues()(j)));
      }
    }
  }

  polish(gram, noise, columns);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(columns.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> rayleigh(order.size());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    rayleigh[static_cast<std::size_t>(j)] = std::max(0.0, columns.col(j).dot(noise * columns.col(j)));
  }
  // The constant stays first; rotations can reorder near-degenerate pairs.
  std::stable_sort(order.begin() + 1, order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return rayleigh[static_cast<std::size_t>(a)] < rayleigh[static_cast<std::size_t>(b)];
  });

  EigentaskBasis basis;
  basis.beta_sq.resize(columns.cols());
  basis.combinations.resize(k, columns.cols());
  for (std::size_t j = 0; j < order.size(); ++j) {
    basis.beta_sq(static_cast<Eigen::Index>(j)) = rayleigh[static_cast<std::size_t>(order[j])];
    basis.combinations.col(static_cast<Eigen::Index>(j)) = columns.col(order[j]);
  }
  for (Eigen::Index j = 1; j < basis.combinations.cols(); ++j) fix_sign(basis.combinations.col(j));
  // beta^2 is the Rayleigh quotient of the returned basis, read off r^T V r.
  const Eigen::MatrixXd projected = basis.combinations.transpose() * noise * basis.combinations;
  for (Eigen::Index j = 1; j < projected.rows(); ++j) basis.beta_sq(j) = std::max(0.0, projected(j, j));
  basis.beta_sq(0) = beta_sq.front();
  return basis;
}

TargetDecomposition decompose_target(const Target& target, const FeatureMap& map, const EigentaskBasis& basis,
                                     const InputDistribution& dist, const QuadratureSpec& spec) {
  QuadratureSpec split = spec;
  split.breakpoints.insert(split.breakpoints.end(), target.discontinuities().begin(), target.discontinuities().end());
  const QuadratureRule rule = expectation_rule(dist, split);

  std::vector<Eigen::VectorXd> tasks;
  std::vector<double> values;
  tasks.reserve(rule.size());
  values.reserve(rule.size());
  double power = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double f = target(rule.nodes[i]);
    if (!std::isfinite(f)) throw ValidationError("decompose_target: target is not finite at u = " + std::to_string(rule.nodes[i]));
    const FeatureVector x = map(rule.nodes[i]);
    if (x.size() != basis.dimension()) throw ValidationError("decompose_target: basis/feature dimension mismatch");
    tasks.push_back(basis.eigentasks(x.values));
    values.push_back(f);
    power += rule.weights[i] * f * f;
  }
  if (!(power > 0.0)) throw ValidationError("decompose_target: target has zero power under the input distribution");

  const double scale = 1.0 / std::sqrt(power);
  TargetDecomposition dec;
  dec.raw_power = power;
  dec.scale = scale;
  dec.eigentask_coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.effective_rank()));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    dec.eigentask_coefficients += rule.weights[i] * scale * values[i] * tasks[i];
  }
  double direct = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double perp = scale * values[i] - dec.eigentask_coefficients.dot(tasks[i]);
    direct += rule.weights[i] * perp * perp;
  }
  dec.residual_power_direct = direct;
  dec.residual_power = 1.0 - dec.eigentask_coefficients.squaredNorm();
  if (dec.residual_power < -1e-8) {
    throw NumericalError(fmt::format("decompose_target: negative residual power {:.3g} (quadrature inconsistency)",
                                     dec.residual_power));
  }
  dec.residual_power = std::max(0.0, dec.residual_power);
  dec.feature_coefficients = basis.combinations * dec.eigentask_coefficients;
  return dec;
}

TargetDecomposition decompose_target(const Target& target, const Reservoir& reservoir, const EigentaskBasis& basis,
                                     const InputDistribution& dist, const QuadratureSpec& spec) {
  return decompose_target(target, reservoir_map(reservoir), basis, dist, spec);
}

Capacities capacities(const Eigen::VectorXd& a, const Eigen::VectorXd& beta_sq, double shots) {
  if (!(shots >= 1.0)) throw ValidationError("capacities: S must be >= 1");
  if (a.size() != 0 && a.size() != beta_sq.size()) throw ValidationError("capacities: a and beta_sq sizes differ");
  Capacities c;
  for (Eigen::Index k = 0; k < beta_sq.size(); ++k) {
    const double share = 1.0 / (1.0 + beta_sq(k) / shots);
    c.resolvable += share;
    if (a.size() != 0) c.functional += a(k) * a(k) * share;
  }
  return c;
}

void write_moments_json(std::ostream& out, const MomentSet& moments) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(m.cols());
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j;
  j["format"] = "qrc-moments v1";
  j["rule"] = moments.rule;
  j["nodes"] = moments.nodes;
  j["K"] = moments.dimension();
  j["G"] = matrix(moments.gram);
  j["V"] = matrix(moments.noise);
  j["d"] = std::vector<double>(moments.mean.data(), moments.mean.data() + moments.mean.size());
  j["identity_residual"] = moments.identity_residual;
  out << j.dump(1) << '\n';
}

void write_basis_csv(std::ostream& out, const EigentaskBasis& basis) {
  out << "# qrc-basis v1 K=" << basis.dimension() << " K_eff=" << basis.effective_rank() << '\n';
  for (Eigen::Index i = 0; i < basis.combinations.rows(); ++i) {
    for (Eigen::Index j = 0; j < basis.combinations.cols(); ++j) {
      if (j) out << ',';
      out << fmt::format("{:.17g}", basis.combinations(i, j));
    }
    out << '\n';
  }
}

EigentaskBasis read_basis_csv(std::istream& in, const Eigen::VectorXd& beta_sq) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, ',');) row.push_back(std::stod(f));
    if (!rows.empty() && row.size() != rows.front().size()) throw ValidationError("basis csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("basis csv: no rows");
  EigentaskBasis basis;
  basis.combinations.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) basis.combinations(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (beta_sq.size() != basis.combinations.cols()) throw ValidationError("basis csv: column count differs from spectrum length");
  basis.beta_sq = beta_sq;
  return basis;
}

}  // namespace qrc
