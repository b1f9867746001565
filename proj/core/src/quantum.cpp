#include "lgsim/quantum.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "lgsim/error.hpp"

namespace lgsim {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ConfigError(os.str());
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << "dimension mismatch in " << what << ": " << a << " vs " << b;
    throw ConfigError(os.str());
  }
}

}  // namespace

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double clamp_probability(double p) {
  if (!std::isfinite(p)) throw NumericalError("non-finite probability");
  if (p < 0.0) {
    if (p < tol::kClamp) {
      std::ostringstream os;
      os << "probability " << p << " is below the clamping floor " << tol::kClamp;
      throw NumericalError(os.str());
    }
    return 0.0;
  }
  if (p > 1.0 + tol::kProbability) {
    std::ostringstream os;
    os << "probability " << p << " exceeds 1";
    throw NumericalError(os.str());
  }
  return p > 1.0 ? 1.0 : p;
}

// ---------------------------------------------------------------------------
// DensityMatrix

void DensityMatrix::validate(const CMatrix& rho) {
  require_square(rho, "density matrix");
  if (rho.rows() < 2) throw InvariantViolation("density matrix dimension must be >= 2");
  if (!all_finite(rho)) throw InvariantViolation("density matrix has non-finite entries");
  const double herm = max_abs(CMatrix(rho - rho.adjoint()));
  if (herm > tol::kStructural) {
    std::ostringstream os;
    os << "density matrix not Hermitian (max deviation " << herm << ")";
    throw InvariantViolation(os.str());
  }
  const Complex tr = rho.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > tol::kStructural) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << "+" << tr.imag() << "i != 1";
    throw InvariantViolation(os.str());
  }
  const CMatrix sym = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < tol::kEigenFloor) {
    std::ostringstream os;
    os << "density matrix not positive semidefinite (min eigenvalue " << lmin << ")";
    throw InvariantViolation(os.str());
  }
}

DensityMatrix::DensityMatrix(CMatrix rho) : rho_(std::move(rho)) { validate(rho_); }

DensityMatrix::DensityMatrix(CMatrix rho, TrustedTag) : rho_(0.5 * (rho + rho.adjoint())) {}

DensityMatrix DensityMatrix::trusted(CMatrix rho) { return DensityMatrix(std::move(rho), TrustedTag{}); }

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidParameter("state vector has zero norm");
  const CVector v = psi / norm;
  return DensityMatrix(CMatrix(v * v.adjoint()));
}

DensityMatrix DensityMatrix::basis_state(int dim, int n) {
  if (dim < 2) throw InvalidParameter("dimension must be >= 2");
  if (n < 0 || n >= dim) throw std::out_of_range("basis index out of range");
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(n, n) = 1.0;
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 2) throw InvalidParameter("dimension must be >= 2");
  return DensityMatrix(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
}

// ---------------------------------------------------------------------------
// UnitaryEvolution

UnitaryEvolution::UnitaryEvolution(CMatrix u) : u_(std::move(u)) {
  require_square(u_, "unitary");
  if (!all_finite(u_)) throw InvariantViolation("unitary has non-finite entries");
  const double dev = max_abs(CMatrix(u_.adjoint() * u_ - CMatrix::Identity(u_.rows(), u_.cols())));
  if (dev > tol::kStructural) {
    std::ostringstream os;
    os << "matrix is not unitary (max |U^dag U - 1| = " << dev << ")";
    throw InvariantViolation(os.str());
  }
}

UnitaryEvolution UnitaryEvolution::identity(int dim) {
  return UnitaryEvolution(CMatrix::Identity(dim, dim));
}

UnitaryEvolution UnitaryEvolution::after(const UnitaryEvolution& first) const {
  require_same_dim(dim(), first.dim(), "unitary composition");
  return UnitaryEvolution(CMatrix(u_ * first.u_));
}

// ---------------------------------------------------------------------------
// LabeledProjectorSet

LabeledProjectorSet::LabeledProjectorSet(std::vector<CMatrix> projectors, std::vector<int> q_labels,
                                         std::vector<std::string> names)
    : projectors_(std::move(projectors)), q_labels_(std::move(q_labels)), names_(std::move(names)) {
  if (projectors_.empty()) throw ConfigError("projector set is empty");
  dim_ = static_cast<int>(projectors_.front().rows());
  if (projectors_.size() != q_labels_.size()) {
    throw ConfigError("projector set needs exactly one q-label per projector");
  }
  if (!names_.empty() && names_.size() != projectors_.size()) {
    throw ConfigError("projector names must match the number of projectors");
  }
  if (static_cast<int>(projectors_.size()) > dim_) {
    throw ConfigError("more projectors than the Hilbert-space dimension");
  }
  for (int q : q_labels_) {
    if (q != 1 && q != -1) throw InvalidParameter("q-labels must be +1 or -1");
  }
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (std::size_t k = 0; k < projectors_.size(); ++k) {
    const CMatrix& p = projectors_[k];
    require_square(p, "projector");
    require_same_dim(static_cast<int>(p.rows()), dim_, "projector set");
    if (!all_finite(p)) throw InvariantViolation("projector has non-finite entries");
    if (max_abs(CMatrix(p - p.adjoint())) > tol::kStructural) {
      throw InvariantViolation("projector is not Hermitian");
    }
    for (std::size_t j = 0; j < projectors_.size(); ++j) {
      const CMatrix prod = p * projectors_[j];
      const CMatrix expected = (j == k) ? p : CMatrix::Zero(dim_, dim_);
      if (max_abs(CMatrix(prod - expected)) > tol::kStructural) {
        throw InvariantViolation(j == k ? "projector is not idempotent"
                                        : "projectors are not mutually orthogonal");
      }
    }
    sum += p;
  }
  if (max_abs(CMatrix(sum - CMatrix::Identity(dim_, dim_))) > tol::kStructural) {
    throw InvariantViolation("projectors do not sum to the identity");
  }
}

LabeledProjectorSet LabeledProjectorSet::computational_basis(std::vector<int> q_labels,
                                                             std::vector<std::string> names) {
  const int dim = static_cast<int>(q_labels.size());
  std::vector<std::vector<int>> groups;
  for (int n = 0; n < dim; ++n) groups.push_back({n});
  return coarse_grained(dim, groups, std::move(q_labels), std::move(names));
}

LabeledProjectorSet LabeledProjectorSet::coarse_grained(int dim,
                                                        const std::vector<std::vector<int>>& groups,
                                                        std::vector<int> q_labels,
                                                        std::vector<std::string> names) {
  if (dim < 1) throw InvalidParameter("dimension must be positive");
  std::vector<CMatrix> projectors;
  projectors.reserve(groups.size());
  for (const auto& g : groups) {
    CMatrix p = CMatrix::Zero(dim, dim);
    for (int n : g) {
      if (n < 0 || n >= dim) throw ConfigError("projector group index out of range");
      p(n, n) += 1.0;
    }
    projectors.push_back(std::move(p));
  }
  return LabeledProjectorSet(std::move(projectors), std::move(q_labels), std::move(names));
}

CMatrix LabeledProjectorSet::observable() const {
  CMatrix q = CMatrix::Zero(dim_, dim_);
  for (std::size_t k = 0; k < projectors_.size(); ++k) {
    q += static_cast<double>(q_labels_[k]) * projectors_[k];
  }
  return q;
}

bool LabeledProjectorSet::is_diagonal() const {
  for (const auto& p : projectors_) {
    CMatrix off = p;
    off.diagonal().setZero();
    if (max_abs(off) > tol::kStructural) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Operations

DensityMatrix evolve(const DensityMatrix& rho, const UnitaryEvolution& u) {
  require_same_dim(rho.dim(), u.dim(), "evolve");
  return DensityMatrix::trusted(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

RVector probabilities_projective(const DensityMatrix& rho, const LabeledProjectorSet& meas) {
  require_same_dim(rho.dim(), meas.dim(), "probabilities_projective");
  RVector p(meas.size());
  for (int k = 0; k < meas.size(); ++k) {
    p(k) = clamp_probability((meas.projector(k) * rho.matrix()).trace().real());
  }
  return p;
}

ProjectiveOutcome post_measurement_state_projective(const DensityMatrix& rho,
                                                    const LabeledProjectorSet& meas, int outcome) {
  require_same_dim(rho.dim(), meas.dim(), "post_measurement_state_projective");
  if (outcome < 0 || outcome >= meas.size()) throw std::out_of_range("outcome index out of range");
  const CMatrix& pi = meas.projector(outcome);
  const CMatrix branch = pi * rho.matrix() * pi;
  const double p = clamp_probability(branch.trace().real());
  ProjectiveOutcome out;
  out.probability = p;
  if (p > 0.0) out.state = DensityMatrix::trusted(branch / p);
  return out;
}

Complex cross_term_X(const DensityMatrix& rho2, const UnitaryEvolution& u32,
                     const LabeledProjectorSet& meas2, const LabeledProjectorSet& meas3, int n3,
                     int n, int nprime) {
  require_same_dim(rho2.dim(), u32.dim(), "cross_term_X");
  require_same_dim(rho2.dim(), meas2.dim(), "cross_term_X");
  require_same_dim(rho2.dim(), meas3.dim(), "cross_term_X");
  if (n3 < 0 || n3 >= meas3.size() || n < 0 || n >= meas2.size() || nprime < 0 ||
      nprime >= meas2.size()) {
    throw std::out_of_range("cross_term_X index out of range");
  }
  const CMatrix& u = u32.matrix();
  const CMatrix inner = meas2.projector(n) * rho2.matrix() * meas2.projector(nprime);
  return (meas3.projector(n3) * u * inner * u.adjoint()).trace();
}

CrossTermTable::CrossTermTable(const DensityMatrix& rho2, const UnitaryEvolution& u32,
                               const LabeledProjectorSet& meas2, const LabeledProjectorSet& meas3)
    : k3_(meas3.size()), m_(meas2.size()) {
  require_same_dim(rho2.dim(), u32.dim(), "CrossTermTable");
  require_same_dim(rho2.dim(), meas2.dim(), "CrossTermTable");
  require_same_dim(rho2.dim(), meas3.dim(), "CrossTermTable");
  const CMatrix& u = u32.matrix();
  // Heisenberg-evolved t3 projectors, so X = tr(A_{n3} Pi_n rho Pi_{n'}).
  std::vector<CMatrix> back(static_cast<std::size_t>(k3_));
  for (int n3 = 0; n3 < k3_; ++n3) back[static_cast<std::size_t>(n3)] = u.adjoint() * meas3.projector(n3) * u;
  x_.resize(static_cast<std::size_t>(k3_ * m_ * m_));
  for (int n = 0; n < m_; ++n) {
    for (int np = 0; np < m_; ++np) {
      const CMatrix inner = meas2.projector(n) * rho2.matrix() * meas2.projector(np);
      for (int n3 = 0; n3 < k3_; ++n3) {
        x_[static_cast<std::size_t>((n3 * m_ + n) * m_ + np)] =
            (back[static_cast<std::size_t>(n3)] * inner).trace();
      }
    }
  }
}

}  // namespace lgsim
