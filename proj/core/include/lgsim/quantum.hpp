#pragma once

// Dense linear algebra for finite-dimensional states, unitary steps and
// projective measurement statistics. All matrices are small (M <= 4 in every
// scenario), so everything is dense Eigen storage with dynamic size.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lgsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Structural tolerances shared by every module.
namespace tol {
inline constexpr double kStructural = 1e-12;   // Hermiticity, unitarity, projector algebra
inline constexpr double kProbability = 1e-10;  // sums of probabilities, dual-path agreement
inline constexpr double kEigenFloor = -1e-10;  // smallest admissible density-matrix eigenvalue
inline constexpr double kClamp = -1e-12;       // probabilities in [kClamp, 0) are clamped to 0
inline constexpr double kViolation = 1e-10;    // margin before a bound counts as violated
}  // namespace tol

/// Largest absolute entry of a matrix; used for all elementwise tolerance checks.
double max_abs(const CMatrix& m);
double max_abs(const RMatrix& m);

bool all_finite(const CMatrix& m);

/// Clamp a probability computed in floating point. Values in [-1e-12, 0) become 0;
/// anything more negative throws NumericalError.
double clamp_probability(double p);

/// A Hermitian, unit-trace, positive-semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates all invariants (including a Hermitian eigensolve) and throws
  /// InvariantViolation on failure.
  explicit DensityMatrix(CMatrix rho);

  /// |psi><psi| for a normalised (or normalisable) state vector.
  static DensityMatrix pure(const CVector& psi);
  /// |n><n| in the computational basis.
  static DensityMatrix basis_state(int dim, int n);
  /// 1/M.
  static DensityMatrix maximally_mixed(int dim);

  /// Skips the eigensolve; only for results of operations that preserve the
  /// invariants. The matrix is re-symmetrised to remove rounding asymmetry.
  static DensityMatrix trusted(CMatrix rho);

  /// Throws InvariantViolation with a diagnostic if `rho` is not a density matrix.
  static void validate(const CMatrix& rho);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }

 private:
  struct TrustedTag {};
  DensityMatrix(CMatrix rho, TrustedTag);
  CMatrix rho_;
};

class UnitaryEvolution {
 public:
  /// Throws InvariantViolation unless U^dagger U = 1 within 1e-12 elementwise.
  explicit UnitaryEvolution(CMatrix u);

  static UnitaryEvolution identity(int dim);

  int dim() const { return static_cast<int>(u_.rows()); }
  const CMatrix& matrix() const { return u_; }

  /// Composition: (this after first), i.e. this->matrix() * first.matrix().
  UnitaryEvolution after(const UnitaryEvolution& first) const;

 private:
  CMatrix u_;
};

/// Orthogonal projectors {Pi_k} summing to the identity, each carrying a
/// dichotomic label q(k) = +1 or -1. There may be fewer projectors than the
/// Hilbert-space dimension (coarse-grained measurements).
class LabeledProjectorSet {
 public:
  LabeledProjectorSet(std::vector<CMatrix> projectors, std::vector<int> q_labels,
                      std::vector<std::string> names = {});

  /// Rank-one projectors onto the computational basis.
  static LabeledProjectorSet computational_basis(std::vector<int> q_labels,
                                                 std::vector<std::string> names = {});
  /// Projectors onto unions of computational basis states; `groups[k]` lists
  /// the basis indices covered by projector k.
  static LabeledProjectorSet coarse_grained(int dim, const std::vector<std::vector<int>>& groups,
                                            std::vector<int> q_labels,
                                            std::vector<std::string> names = {});

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(projectors_.size()); }
  const CMatrix& projector(int k) const { return projectors_.at(static_cast<std::size_t>(k)); }
  const std::vector<CMatrix>& projectors() const { return projectors_; }
  const std::vector<int>& q_labels() const { return q_labels_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Observable sum_k q(k) Pi_k.
  CMatrix observable() const;

  /// True when every projector is diagonal in the computational basis.
  bool is_diagonal() const;

 private:
  int dim_ = 0;
  std::vector<CMatrix> projectors_;
  std::vector<int> q_labels_;
  std::vector<std::string> names_;
};

/// U rho U^dagger. Throws ConfigError on dimension mismatch.
DensityMatrix evolve(const DensityMatrix& rho, const UnitaryEvolution& u);

/// P(k) = tr(Pi_k rho), clamped to [0, 1].
RVector probabilities_projective(const DensityMatrix& rho, const LabeledProjectorSet& meas);

struct ProjectiveOutcome {
  double probability = 0.0;
  /// Empty when the outcome has zero probability.
  std::optional<DensityMatrix> state;
};

/// Lueders update: (P(n), Pi_n rho Pi_n / P(n)). Throws std::out_of_range for a bad index.
ProjectiveOutcome post_measurement_state_projective(const DensityMatrix& rho,
                                                    const LabeledProjectorSet& meas, int outcome);

/// X(n3, n, n') = tr{ Pi3_{n3} U32 [Pi_n rho2 Pi_{n'}] U32^dagger }, where Pi_n
/// are the (rank-one or coarse) projectors of `meas2`.
Complex cross_term_X(const DensityMatrix& rho2, const UnitaryEvolution& u32,
                     const LabeledProjectorSet& meas2, const LabeledProjectorSet& meas3, int n3,
                     int n, int nprime);

/// All X(n3, n, n') at once; indexed as (n3 * M + n) * M + n'.
class CrossTermTable {
 public:
  CrossTermTable(const DensityMatrix& rho2, const UnitaryEvolution& u32,
                 const LabeledProjectorSet& meas2, const LabeledProjectorSet& meas3);

  int outcomes3() const { return k3_; }
  int states() const { return m_; }
  Complex operator()(int n3, int n, int nprime) const {
    return x_[static_cast<std::size_t>((n3 * m_ + n) * m_ + nprime)];
  }

 private:
  int k3_ = 0;
  int m_ = 0;
  std::vector<Complex> x_;
};

}  // namespace lgsim
