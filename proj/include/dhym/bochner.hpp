#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dhym/hermitian.hpp"
#include "dhym/torus.hpp"

namespace dhym {

/// R[i][p] stands for the bisectional component R_{i ibar p pbar}; symmetric, diagonal unused.
struct CurvatureInput {
  int n = 0;
  std::vector<double> R;  // row-major n x n

  explicit CurvatureInput(int dim = 0) : n(dim), R(static_cast<std::size_t>(dim) * dim, 0.0) {}
  double operator()(int i, int p) const { return R[i * n + p]; }
  double& operator()(int i, int p) { return R[i * n + p]; }
  bool is_symmetric(double tol = 1e-14) const;
  bool nonnegative() const;
};

/// Derivative data of F at one point in a frame with g = I and F = diag(lam).
///
/// T[i][j][k] = F_{i jbar,k}, symmetric in i <-> k.  Q[i][j][k][l] is the
/// curvature-free symmetric part of F_{i jbar,k lbar}: symmetric in i <-> k
/// and j <-> l, and Q[i][j][k][l] = conj(Q[j][i][l][k]).  The ordered
/// covariant derivatives are recovered from Q and R by the Ricci identity.
struct PointwiseJet {
  int n = 0;
  std::vector<double> lam;
  std::vector<cplx> T;  // n^3
  std::vector<cplx> Q;  // n^4
  CurvatureInput R;
  bool first_constraint_projected = false;
  bool second_constraint_projected = false;

  explicit PointwiseJet(int dim = 0);

  cplx& t(int i, int j, int k) { return T[(i * n + j) * n + k]; }
  cplx t(int i, int j, int k) const { return T[(i * n + j) * n + k]; }
  cplx& q(int i, int j, int k, int l) { return Q[((i * n + j) * n + k) * n + l]; }
  cplx q(int i, int j, int k, int l) const { return Q[((i * n + j) * n + k) * n + l]; }

  /// Max violation of the Bianchi and Hermitian-jet symmetries.
  double symmetry_defect() const;
};

enum class SolutionKind { DHYM, J };

/// 1/(1+lam^2) for dHYM, 1/lam^2 for J.
std::vector<double> jet_weights(std::span<const double> lam, SolutionKind kind);

/// Random jet with the stated symmetries (Gaussian entries).
PointwiseJet random_jet(std::span<const double> lam, const CurvatureInput& R, std::mt19937_64& rng);

/// Orthogonal projection of T onto {sum_p w_p T[p][p][j] = 0 for all j}.
void project_first_derivative(PointwiseJet& jet, SolutionKind kind);
/// Adjust Q so that the differentiated equation holds to second order.
void project_second_derivative(PointwiseJet& jet, SolutionKind kind);

/// max_j |sum_p w_p T[p][p][j]|.
double first_constraint_residual(const PointwiseJet& jet, SolutionKind kind);
/// max_{p,q} of the second-order constraint defect.
double second_constraint_residual(const PointwiseJet& jet, SolutionKind kind);

struct IdentityPair {
  double a = 0.0;
  double b = 0.0;
  double scale = 1.0;  // magnitude of the largest contributing term, for relative comparisons
  double rel_error() const;
};

/// (lhs, rhs): eta^{p qbar} d_p d_qbar log det(eta) evaluated directly from the
/// jet, against the expanded form with commuted fourth derivatives and
/// explicit curvature terms.  `kind` selects eta = I + F^2 (DHYM) or F^2 (J).
IdentityPair lap_expansion_general(const PointwiseJet& jet, SolutionKind kind = SolutionKind::DHYM);
/// (penultimate, final) at a solution, dHYM case.
IdentityPair lap_at_solution(const PointwiseJet& jet);
/// (penultimate, final) at a solution, J case.
IdentityPair j_lap_at_solution(const PointwiseJet& jet);

class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Grid-level checks ----------------------------------------------------------

struct GridBochnerReport {
  double lhs_sup = 0.0;
  double rhs_sup = 0.0;
  double discrepancy = 0.0;      // sup |lhs - rhs|
  double rel_discrepancy = 0.0;  // discrepancy / max(rhs_sup, tiny)
  double lhs_min = 0.0;
};

/// Discrete Laplacian of log det(I + K^2) against the pointwise expansion on
/// the discrete jet of phi (flat background, g = I).
GridBochnerReport grid_bochner_check(const ScalarGridField& phi, const HermitianMatrix& f0);

struct RefinementStudy {
  std::vector<int> N;
  std::vector<double> discrepancy;
  std::vector<double> order;  // log2 ratios between consecutive N (doubling assumed)
};
RefinementStudy grid_bochner_refinement(const TrigPolynomial& phi, const HermitianMatrix& f0, int n,
                                        std::span<const int> Ns, int stencil_order = 2);

enum class RegimeStatus { OK, REGIME_EXIT };
std::string to_string(RegimeStatus s);

struct SubharmonicityReport {
  RegimeStatus status = RegimeStatus::OK;
  bool regime_ok = true;
  double min_value = 0.0;        // min over grid of the penultimate at-solution form
  double min_final = 0.0;        // min over grid of the final form
  double constraint_residual = 0.0;  // sup of the measured first-derivative constraint
};

SubharmonicityReport subharmonicity_monitor(const ScalarGridField& phi, const HermitianMatrix& f0);
/// Pointwise variant on explicit data (used for synthetic regime checks).
SubharmonicityReport subharmonicity_point(const PointwiseJet& jet);

// Randomized identity trials ---------------------------------------------------

enum class TrialKind { GENERAL, AT_SOLUTION, J_AT_SOLUTION };
std::string to_string(TrialKind k);

struct TrialReport {
  TrialKind kind = TrialKind::GENERAL;
  std::uint64_t seed = 0;
  int n = 0;
  int trials = 0;
  double max_rel_err = 0.0;
  double min_final_value = 0.0;
  int regime_violations = 0;
  int strict_positive = 0;  // draws with final > 0 when some R > 0 and distinct eigenvalues
  int strict_candidates = 0;
  nlohmann::json to_json() const;
};

TrialReport run_identity_trials(TrialKind kind, int n, int trials, std::uint64_t seed, bool with_curvature = true);

/// Per-trial seed derived from a root seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace dhym
