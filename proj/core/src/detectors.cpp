#include "lgsim/detectors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lgsim/error.hpp"

namespace lgsim {

namespace {

constexpr double kLeftInverseTol = 1e-10;

void check_conditional_matrix(const RMatrix& c) {
  if (c.rows() == 0 || c.cols() == 0) throw ConfigError("conditional-probability matrix is empty");
  if (c.rows() < c.cols()) {
    throw ReconstructionError(
        "need at least as many detector responses as states (M_A >= M) to reconstruct "
        "quasiprobabilities");
  }
  for (Eigen::Index a = 0; a < c.rows(); ++a) {
    for (Eigen::Index n = 0; n < c.cols(); ++n) {
      const double v = c(a, n);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream os;
        os << "c(" << a << "," << n << ") = " << v << " is not a probability";
        throw InvariantViolation(os.str());
      }
    }
  }
  const RVector colsum = c.colwise().sum().transpose();
  for (Eigen::Index n = 0; n < colsum.size(); ++n) {
    if (std::abs(colsum(n) - 1.0) > tol::kStructural) {
      std::ostringstream os;
      os << "column " << n << " of c sums to " << colsum(n) << ", not 1";
      throw InvariantViolation(os.str());
    }
  }
}

RMatrix entrywise_sqrt(const RMatrix& c) {
  RMatrix s(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double v = c.data()[i];
    s.data()[i] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return s;
}

}  // namespace

AmbiguousDetector::AmbiguousDetector(RMatrix c, RMatrix d, std::vector<std::string> response_names)
    : c_(std::move(c)), d_(std::move(d)), names_(std::move(response_names)) {
  check_conditional_matrix(c_);
  if (d_.rows() != c_.cols() || d_.cols() != c_.rows()) {
    std::ostringstream os;
    os << "left inverse must be " << c_.cols() << "x" << c_.rows() << ", got " << d_.rows() << "x"
       << d_.cols();
    throw ConfigError(os.str());
  }
  const double li = max_abs(RMatrix(d_ * c_ - RMatrix::Identity(c_.cols(), c_.cols())));
  if (!(li <= kLeftInverseTol)) {
    std::ostringstream os;
    os << "d is not a left inverse of c (max |d c - 1| = " << li << ")";
    throw ReconstructionError(os.str());
  }
  const RVector dcol = d_.colwise().sum().transpose();
  for (Eigen::Index a = 0; a < dcol.size(); ++a) {
    if (std::abs(dcol(a) - 1.0) > kLeftInverseTol) {
      std::ostringstream os;
      os << "column " << a << " of d sums to " << dcol(a) << "; reconstruction would not conserve probability";
      throw ReconstructionError(os.str());
    }
  }
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != c_.rows()) {
    throw ConfigError("response names must match the number of detector responses");
  }
  sqrt_c_ = entrywise_sqrt(c_);
}

AmbiguousDetector make_unambiguous_detector(int m) {
  if (m < 1) throw InvalidParameter("detector needs at least one state");
  return AmbiguousDetector(RMatrix::Identity(m, m), RMatrix::Identity(m, m));
}

AmbiguousDetector make_inverted_detector(int m) {
  if (m < 3) {
    throw InvalidParameter("inverted measurements need M >= 3 states");
  }
  const RMatrix j = RMatrix::Ones(m, m);
  const RMatrix one = RMatrix::Identity(m, m);
  RMatrix c = (j - one) / static_cast<double>(m - 1);
  RMatrix d = j - static_cast<double>(m - 1) * one;
  return AmbiguousDetector(std::move(c), std::move(d));
}

AmbiguousDetector make_weak_detector(int m, double epsilon) {
  if (m < 2) throw InvalidParameter("weak detector needs M >= 2 states");
  if (!(epsilon > 0.0)) throw InvalidParameter("weak detector needs epsilon > 0 (d diverges at 0)");
  if (epsilon > 1.0) throw InvalidParameter("weak detector needs epsilon <= 1 (c would be negative)");
  const RMatrix j = RMatrix::Ones(m, m);
  const RMatrix one = RMatrix::Identity(m, m);
  const double md = static_cast<double>(m);
  RMatrix c = ((1.0 - epsilon) / md) * j + epsilon * one;
  RMatrix d = (1.0 / epsilon) * one + ((epsilon - 1.0) / (epsilon * md)) * j;
  return AmbiguousDetector(std::move(c), std::move(d));
}

AmbiguousDetector make_custom_detector(const RMatrix& c, const std::optional<RMatrix>& d,
                                       std::vector<std::string> response_names) {
  check_conditional_matrix(c);
  if (d) return AmbiguousDetector(c, *d, std::move(response_names));

  Eigen::JacobiSVD<RMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector sv = svd.singularValues();
  if (sv.size() < c.cols() || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw ReconstructionError(
        "c is rank deficient: the ambiguous responses do not carry enough information to "
        "reconstruct the state probabilities (need rank(c) = M)");
  }
  const RMatrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  const auto ma = c.rows();
  const auto m = c.cols();
  const RMatrix residual_proj = RMatrix::Identity(ma, ma) - c * pinv;
  const RMatrix ones = RMatrix::Ones(m, ma);
  RMatrix left = pinv + (ones * residual_proj) / static_cast<double>(m);
  return AmbiguousDetector(c, std::move(left), std::move(response_names));
}

KrausSet::KrausSet(std::vector<CMatrix> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw ConfigError("Kraus set is empty");
  const auto dim = ops_.front().rows();
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const auto& k : ops_) {
    if (k.rows() != dim || k.cols() != dim) throw ConfigError("Kraus operators differ in dimension");
    if (max_abs(CMatrix(k - k.adjoint())) > tol::kStructural) {
      throw InvariantViolation("Kraus operator is not Hermitian");
    }
    sum += k * k;
  }
  if (max_abs(CMatrix(sum - CMatrix::Identity(dim, dim))) > tol::kStructural) {
    throw InvariantViolation("Kraus operators are not complete (sum M_a^2 != 1)");
  }
}

KrausSet kraus_from_detector(const AmbiguousDetector& det, const LabeledProjectorSet& basis) {
  if (basis.size() != det.states()) {
    std::ostringstream os;
    os << "detector has " << det.states() << " states but the basis has " << basis.size()
       << " projectors";
    throw ConfigError(os.str());
  }
  std::vector<CMatrix> ops;
  ops.reserve(static_cast<std::size_t>(det.responses()));
  for (int a = 0; a < det.responses(); ++a) {
    CMatrix k = CMatrix::Zero(basis.dim(), basis.dim());
    for (int n = 0; n < det.states(); ++n) k += det.sqrt_c()(a, n) * basis.projector(n);
    ops.push_back(std::move(k));
  }
  return KrausSet(std::move(ops));
}

RMatrix gamma_coefficients(const AmbiguousDetector& det) {
  const RMatrix& s = det.sqrt_c();
  // (s^T s)(n, n') = sum_alpha sqrt(c_{alpha n} c_{alpha n'})
  RMatrix g = RMatrix::Ones(det.states(), det.states()) - s.transpose() * s;
  g.diagonal().setZero();
  return g;
}

GammaTensor::GammaTensor(const AmbiguousDetector& det) : m_(det.states()) {
  const RMatrix& s = det.sqrt_c();
  const RMatrix& d = det.d();
  g_.assign(static_cast<std::size_t>(m_ * m_ * m_), 0.0);
  for (int n2 = 0; n2 < m_; ++n2) {
    for (int n = 0; n < m_; ++n) {
      for (int np = 0; np < m_; ++np) {
        double acc = 0.0;
        for (int a = 0; a < det.responses(); ++a) acc += d(n2, a) * s(a, n) * s(a, np);
        g_[static_cast<std::size_t>((n2 * m_ + n) * m_ + np)] = acc;
      }
    }
  }
}

}  // namespace lgsim
