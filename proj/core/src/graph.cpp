#include "dpdgt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dpdgt/errors.hpp"

namespace dpdgt {
namespace {

constexpr double kStochasticSlack = 1e-12;
constexpr std::size_t kDenseFallbackLimit = 64;

void check_edges(std::size_t n, const EdgeList& edges, const char* which) {
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      std::ostringstream msg;
      msg << which << " edge (" << i << ", " << j << ") references a node outside [0, " << n
          << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

// Canonical edge set: sorted, deduplicated, self-loops dropped.
EdgeList canonical(const EdgeList& edges) {
  std::set<Edge> unique;
  for (const auto& e : edges) {
    if (e.first != e.second) unique.insert(e);
  }
  return {unique.begin(), unique.end()};
}

EdgeList support_of(const Matrix& m) {
  EdgeList out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) > 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

double dense_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("dense eigensolver failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vector start_vector(std::size_t n) {
  // Fixed, irregular start so that no structured eigenvector is missed.
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v(i) = 1.0 + 0.5 * std::sin(1.0 + 2.718281828 * static_cast<double>(i + 1));
  }
  return v / v.norm();
}

double radius_with_fallback(const Matrix& a, const PowerIterationOptions& opts,
                            std::string& method) {
  try {
    method = "power";
    return power_iteration_radius(a, opts);
  } catch (const ConvergenceError&) {
    if (a.rows() > static_cast<Eigen::Index>(kDenseFallbackLimit)) throw;
    method = "dense";
    return dense_radius(a);
  }
}

}  // namespace

CommGraph::CommGraph(std::size_t n_agents, EdgeList edges_r, EdgeList edges_c, Matrix r, Matrix c)
    : n_(n_agents),
      edges_r_(std::move(edges_r)),
      edges_c_(std::move(edges_c)),
      r_(std::move(r)),
      c_(std::move(c)) {
  if (n_ == 0) throw std::invalid_argument("graph needs at least one agent");
  const auto n = static_cast<Eigen::Index>(n_);
  if (r_.rows() != n || r_.cols() != n || c_.rows() != n || c_.cols() != n) {
    throw std::invalid_argument("mixing matrices must be n x n");
  }
  check_edges(n_, edges_r_, "pull");
  check_edges(n_, edges_c_, "push");
  if ((r_.array() < 0.0).any() || (r_.array() > 1.0).any() || (c_.array() < 0.0).any() ||
      (c_.array() > 1.0).any()) {
    throw std::invalid_argument("mixing weights must lie in [0, 1]");
  }
  const double slack = kStochasticSlack * static_cast<double>(n_);
  if (((r_.rowwise().sum().array() - 1.0).abs() > slack).any()) {
    throw std::invalid_argument("R is not row-stochastic");
  }
  if (((c_.colwise().sum().array() - 1.0).abs() > slack).any()) {
    throw std::invalid_argument("C is not column-stochastic");
  }
}

CommGraph CommGraph::from_matrices(Matrix r, Matrix c) {
  const auto n = static_cast<std::size_t>(r.rows());
  EdgeList er = support_of(r);
  EdgeList ec = support_of(c);
  return CommGraph(n, std::move(er), std::move(ec), std::move(r), std::move(c));
}

Matrix CommGraph::r_mixed(double phi) const {
  return (1.0 - phi) * Matrix::Identity(r_.rows(), r_.cols()) + phi * r_;
}

Matrix CommGraph::c_mixed(double gamma) const {
  return (1.0 - gamma) * Matrix::Identity(c_.rows(), c_.cols()) + gamma * c_;
}

CommGraph build_uniform_weights(std::size_t n_agents, const EdgeList& edges_r,
                                const EdgeList& edges_c) {
  if (n_agents == 0) throw std::invalid_argument("graph needs at least one agent");
  check_edges(n_agents, edges_r, "pull");
  check_edges(n_agents, edges_c, "push");
  EdgeList er = canonical(edges_r);
  EdgeList ec = canonical(edges_c);
  const auto n = static_cast<Eigen::Index>(n_agents);

  std::vector<std::size_t> in_degree(n_agents, 0);
  for (const auto& e : er) ++in_degree[e.first];
  std::vector<std::size_t> out_degree(n_agents, 0);
  for (const auto& e : ec) ++out_degree[e.second];

  Matrix r = Matrix::Zero(n, n);
  for (const auto& [i, j] : er) r(i, j) = 1.0 / static_cast<double>(in_degree[i] + 1);
  Matrix c = Matrix::Zero(n, n);
  for (const auto& [i, j] : ec) c(i, j) = 1.0 / static_cast<double>(out_degree[j] + 1);

  // The self weight closes each row (column) so the sums are as exact as the
  // arithmetic allows.
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) off += r(i, j);
    }
    r(i, i) = 1.0 - off;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) off += c(i, j);
    }
    c(j, j) = 1.0 - off;
  }
  return CommGraph(n_agents, std::move(er), std::move(ec), std::move(r), std::move(c));
}

std::vector<bool> reachable_from(const Matrix& a, std::size_t root) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> frontier{root};
  seen[root] = true;
  while (!frontier.empty()) {
    const std::size_t j = frontier.front();
    frontier.pop_front();
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i] && a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
        seen[i] = true;
        frontier.push_back(i);
      }
    }
  }
  return seen;
}

ConnectivityVerdict check_connectivity(const CommGraph& g) {
  const Matrix ct = g.c().transpose();
  auto spans = [](const std::vector<bool>& seen) {
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  for (std::size_t r = 0; r < g.n_agents(); ++r) {
    if (spans(reachable_from(g.r(), r)) && spans(reachable_from(ct, r))) {
      return {true, r};
    }
  }
  return {false, std::nullopt};
}

double power_iteration_radius(const Matrix& a, const PowerIterationOptions& opts) {
  if (a.rows() != a.cols()) throw std::invalid_argument("power iteration needs a square matrix");
  Vector v = start_vector(static_cast<std::size_t>(a.rows()));
  double previous = -1.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    Vector next = a * v;
    const double growth = next.norm();
    if (growth == 0.0) return 0.0;
    if (std::abs(growth - previous) <= opts.tolerance * std::max(1.0, growth)) return growth;
    previous = growth;
    v = next / growth;
  }
  throw ConvergenceError("power iteration did not converge");
}

Vector left_perron_vector(const Matrix& row_stochastic, const PowerIterationOptions& opts) {
  const Eigen::Index n = row_stochastic.rows();
  // The lazy chain (I + A) / 2 has the same Perron vector and no periodicity.
  const Matrix lazy_t = 0.5 * (Matrix::Identity(n, n) + row_stochastic).transpose();
  Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    Vector next = lazy_t * pi;
    next /= next.sum();
    const double change = (next - pi).lpNorm<Eigen::Infinity>();
    pi = std::move(next);
    if (change <= opts.tolerance * 1e-2) return pi;
  }
  throw ConvergenceError("Perron vector iteration did not converge");
}

Vector right_perron_vector(const Matrix& col_stochastic, const PowerIterationOptions& opts) {
  return left_perron_vector(col_stochastic.transpose(), opts);
}

SpectralData spectral_analysis(const CommGraph& g, double gamma, double phi,
                               const PowerIterationOptions& opts) {
  if (!(gamma > 0.0 && gamma <= 1.0) || !(phi > 0.0 && phi <= 1.0)) {
    throw std::invalid_argument("gamma and phi must lie in (0, 1]");
  }
  SpectralData out;
  out.gamma = gamma;
  out.phi = phi;
  out.pi_r = left_perron_vector(g.r(), opts);
  out.pi_c = right_perron_vector(g.c(), opts);

  const Eigen::Index n = g.r().rows();
  const Matrix ones = Vector::Ones(n);
  const Matrix deflated_r = g.r_mixed(phi) - ones * out.pi_r.transpose();
  const Matrix deflated_c = g.c_mixed(gamma) - out.pi_c * ones.transpose();
  out.rho_r = radius_with_fallback(deflated_r, opts, out.rho_r_method);
  out.rho_c = radius_with_fallback(deflated_c, opts, out.rho_c_method);
  out.q_c_estimate = 0.5 * (1.0 + out.rho_c * out.rho_c);
  return out;
}

}  // namespace dpdgt
