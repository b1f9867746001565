#pragma once

// Ambiguous detectors: conditional-probability matrices c (response alpha given
// state n), their left inverses d, the Kraus operators they induce on a basis,
// and the coefficient tensors gamma and Gamma that govern signalling and the
// correlator's coherence term.

#include <optional>
#include <string>
#include <vector>

#include "lgsim/quantum.hpp"

namespace lgsim {

class AmbiguousDetector {
 public:
  /// Validates c (entries in [0,1], unit column sums) and the supplied left
  /// inverse d (d c = 1 and unit column sums, both within 1e-10).
  AmbiguousDetector(RMatrix c, RMatrix d, std::vector<std::string> response_names = {});

  int states() const { return static_cast<int>(c_.cols()); }     // M
  int responses() const { return static_cast<int>(c_.rows()); }  // M_A
  const RMatrix& c() const { return c_; }
  const RMatrix& d() const { return d_; }
  const std::vector<std::string>& response_names() const { return names_; }

  /// Entrywise sqrt(c); zero entries stay exactly zero.
  const RMatrix& sqrt_c() const { return sqrt_c_; }

 private:
  RMatrix c_;
  RMatrix d_;
  RMatrix sqrt_c_;
  std::vector<std::string> names_;
};

/// c = 1 (the unambiguous detector expressed as a detector).
AmbiguousDetector make_unambiguous_detector(int m);

/// Inverted measurement: c = (J - 1)/(M - 1), d = J - (M - 1) 1. Requires M >= 3.
AmbiguousDetector make_inverted_detector(int m);

/// Biased/weak family: c = ((1 - eps)/M) J + eps 1, d = (1/eps) 1 + ((eps - 1)/(eps M)) J.
/// Requires 0 < eps <= 1.
AmbiguousDetector make_weak_detector(int m, double epsilon);

/// Arbitrary column-stochastic c with M_A >= M and full column rank. Without an
/// explicit d, the left inverse is the minimal-Frobenius-norm solution of
/// d c = 1 with unit column sums (equal to the pseudoinverse whenever the
/// all-ones vector lies in the column space of c).
AmbiguousDetector make_custom_detector(const RMatrix& c, const std::optional<RMatrix>& d = std::nullopt,
                                       std::vector<std::string> response_names = {});

/// Kraus operators M_alpha = sum_n sqrt(c_{alpha n}) Pi_n.
class KrausSet {
 public:
  explicit KrausSet(std::vector<CMatrix> ops);
  int size() const { return static_cast<int>(ops_.size()); }
  const CMatrix& op(int alpha) const { return ops_.at(static_cast<std::size_t>(alpha)); }
  const std::vector<CMatrix>& ops() const { return ops_; }

 private:
  std::vector<CMatrix> ops_;
};

KrausSet kraus_from_detector(const AmbiguousDetector& det, const LabeledProjectorSet& basis);

/// gamma(n, n') = 1 - sum_alpha sqrt(c_{alpha n} c_{alpha n'}).
RMatrix gamma_coefficients(const AmbiguousDetector& det);

/// Gamma(n2, n, n') = sum_alpha d_{n2 alpha} sqrt(c_{alpha n} c_{alpha n'}).
class GammaTensor {
 public:
  explicit GammaTensor(const AmbiguousDetector& det);
  int states() const { return m_; }
  double operator()(int n2, int n, int nprime) const {
    return g_[static_cast<std::size_t>((n2 * m_ + n) * m_ + nprime)];
  }

 private:
  int m_ = 0;
  std::vector<double> g_;
};

inline GammaTensor big_gamma_coefficients(const AmbiguousDetector& det) { return GammaTensor(det); }

}  // namespace lgsim
