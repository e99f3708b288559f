#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dpdgt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered node pair, 0-based. Its meaning depends on the list it lives in:
/// in a pull list (i, j) means "i pulls from j", in a push list it means
/// "i receives pushes from j". Either way it puts a positive weight at (i, j).
using Edge = std::pair<std::size_t, std::size_t>;
using EdgeList = std::vector<Edge>;

/// Directed communication topology with a row-stochastic pull matrix R and a
/// column-stochastic push matrix C. Immutable once built.
class CommGraph {
 public:
  /// Validates shape, entry range and stochasticity; throws std::invalid_argument.
  CommGraph(std::size_t n_agents, EdgeList edges_r, EdgeList edges_c, Matrix r, Matrix c);

  /// Builds a graph straight from weight matrices; the edge lists are read
  /// off the off-diagonal support.
  static CommGraph from_matrices(Matrix r, Matrix c);

  std::size_t n_agents() const noexcept { return n_; }
  const EdgeList& edges_r() const noexcept { return edges_r_; }
  const EdgeList& edges_c() const noexcept { return edges_c_; }
  const Matrix& r() const noexcept { return r_; }
  const Matrix& c() const noexcept { return c_; }

  /// (1 - phi) I + phi R, row-stochastic for phi in (0, 1].
  Matrix r_mixed(double phi) const;
  /// (1 - gamma) I + gamma C, column-stochastic for gamma in (0, 1].
  Matrix c_mixed(double gamma) const;

 private:
  std::size_t n_;
  EdgeList edges_r_;
  EdgeList edges_c_;
  Matrix r_;
  Matrix c_;
};

/// Uniform weights over in-neighbours plus self (R) and over out-neighbours
/// plus self (C). Duplicate edges and self-loops are ignored.
CommGraph build_uniform_weights(std::size_t n_agents, const EdgeList& edges_r,
                                const EdgeList& edges_c);

struct ConnectivityVerdict {
  bool holds = false;
  /// Some node that roots a spanning tree of both the pull graph and the
  /// transposed push graph.
  std::optional<std::size_t> common_root;
};

/// Spanning-tree check on the graphs induced by R and by C transposed. A node
/// r roots a spanning tree of the graph induced by A iff every node is
/// reachable from r, where A(i, j) > 0 is an edge from j to i.
ConnectivityVerdict check_connectivity(const CommGraph& g);

/// Nodes reachable from `root` in the graph induced by `a` (edge j -> i iff a(i, j) > 0).
std::vector<bool> reachable_from(const Matrix& a, std::size_t root);

struct SpectralData {
  Vector pi_r;  ///< left Perron vector of R, sums to 1
  Vector pi_c;  ///< right Perron vector of C, sums to 1
  double gamma = 1.0;
  double phi = 1.0;
  double rho_r = 0.0;  ///< spectral radius of R_phi - 1 pi_r^T
  double rho_c = 0.0;  ///< spectral radius of C_gamma - pi_c 1^T
  double q_c_estimate = 0.5;  ///< (1 + rho_c^2) / 2
  /// Which route produced each radius: "power" or "dense".
  std::string rho_r_method;
  std::string rho_c_method;
};

struct PowerIterationOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
};

/// Spectral radius by normalised power iteration. Throws ConvergenceError when
/// the Rayleigh-type estimate ||A v|| does not settle, which is what happens
/// when the dominant eigenvalues form a complex pair or have equal modulus.
double power_iteration_radius(const Matrix& a, const PowerIterationOptions& opts = {});

/// Left Perron vector of a row-stochastic matrix (pi^T A = pi^T, sum 1).
Vector left_perron_vector(const Matrix& row_stochastic, const PowerIterationOptions& opts = {});
/// Right Perron vector of a column-stochastic matrix (A pi = pi, sum 1).
Vector right_perron_vector(const Matrix& col_stochastic, const PowerIterationOptions& opts = {});

/// Perron vectors and contraction radii for mixing parameters gamma, phi in (0, 1].
/// Falls back to a dense eigensolve (n <= 64) when power iteration fails.
SpectralData spectral_analysis(const CommGraph& g, double gamma, double phi,
                               const PowerIterationOptions& opts = {});

}  // namespace dpdgt
