#pragma once

// Leggett-Garg correlators and signalling quantifiers for a three-time
// protocol (preparation at t1, measurement at t2, measurement at t3).
//
// Most quantities are available through two independent routes: directly from
// probability tables (what an experiment would record), and from the quantum
// cross terms X(n3, n, n') combined with the detector coefficients gamma and
// Gamma. The tests hold the two routes against each other.

#include <optional>
#include <span>
#include <vector>

#include "lgsim/detectors.hpp"
#include "lgsim/quantum.hpp"

namespace lgsim {

class ExperimentProtocol {
 public:
  /// `rho1` is the state right after the t1 preparation (declared Q1 = +1).
  /// `meas2` is the unambiguous t2 basis, `meas3` the (possibly coarse) t3
  /// measurement. All dimensions must agree; a detector must have
  /// meas2.size() states.
  ExperimentProtocol(DensityMatrix rho1, UnitaryEvolution u21, UnitaryEvolution u32,
                     LabeledProjectorSet meas2, std::optional<AmbiguousDetector> det2,
                     LabeledProjectorSet meas3);

  int dim() const { return rho1_.dim(); }
  const DensityMatrix& rho1() const { return rho1_; }
  const DensityMatrix& rho2() const { return rho2_; }
  const UnitaryEvolution& u21() const { return u21_; }
  const UnitaryEvolution& u32() const { return u32_; }
  const LabeledProjectorSet& meas2() const { return meas2_; }
  const LabeledProjectorSet& meas3() const { return meas3_; }
  const std::optional<AmbiguousDetector>& detector() const { return det2_; }

  /// Same protocol with a different (or no) t2 detector.
  ExperimentProtocol with_detector(std::optional<AmbiguousDetector> det) const;

 private:
  DensityMatrix rho1_;
  UnitaryEvolution u21_;
  UnitaryEvolution u32_;
  LabeledProjectorSet meas2_;
  std::optional<AmbiguousDetector> det2_;
  LabeledProjectorSet meas3_;
  DensityMatrix rho2_;
};

/// Exact outcome probabilities of the three experiment variants.
struct ProbabilityTables {
  RVector p3;       ///< P(n3), no measurement at t2
  RMatrix p32;      ///< P(n3, n2), unambiguous t2 measurement; rows n3, columns n2
  RMatrix p3alpha;  ///< P(n3, alpha), ambiguous t2 measurement; 0 columns without a detector
  RVector p2;       ///< P(n2), t2-only unambiguous run
  RVector p2alpha;  ///< P(alpha), t2-only ambiguous run; empty without a detector

  bool has_ambiguous() const { return p3alpha.cols() > 0; }
};

ProbabilityTables run_protocol(const ExperimentProtocol& proto);

struct SignallingReport {
  RVector delta;      ///< delta(n3) = P(n3) - sum_n2 P(n3, n2)
  RVector delta_a;    ///< delta_A(n3) = P(n3) - sum_alpha P(n3, alpha); empty without detector
  RVector d;          ///< D(n3) = delta(n3) - delta_A(n3); empty without detector
  double big_delta = 0.0;    ///< sum |delta|
  double big_delta_a = 0.0;  ///< sum |delta_A|; 0 without detector
  bool has_ambiguous = false;
};

SignallingReport signalling_report(const ProbabilityTables& tables);

/// delta and delta_A from the cross terms: sum_{n != n'} X and sum_{n != n'} gamma X.
/// Requires a detector on the protocol.
SignallingReport signalling_report_via_X(const ExperimentProtocol& proto);

/// Breakdown of a correlator into the projective term, the signalling term and
/// the coherence (kappa) term.
struct CorrelatorTerms {
  double probability_term = 0.0;
  double signalling_term = 0.0;
  double kappa_term = 0.0;
};

struct LgiResult {
  double value = 0.0;
  double bound = 0.0;
  bool lower_bound = false;  ///< true for K', which is bounded from below
  bool violated = false;
  CorrelatorTerms decomposition;
};

/// K = <Q2> + <Q3 Q2> - <Q3> with bound 1 + Delta. The direct expectation-value
/// route and the decomposed route are both evaluated; a disagreement beyond
/// 1e-10 raises NumericalError.
LgiResult correlator_K(const ProbabilityTables& tables, std::span<const int> q2,
                       std::span<const int> q3);

/// Direct route only: expectation values of Q2 (joint marginal), Q3 Q2, Q3.
double correlator_K_direct(const ProbabilityTables& tables, std::span<const int> q2,
                           std::span<const int> q3);

/// Quasiprobabilities P~(n3, n2) = sum_alpha d_{n2 alpha} P(n3, alpha).
RMatrix inferred_joint(const ProbabilityTables& tables, const AmbiguousDetector& det);

/// K_A from measured tables and the detector's left inverse, bound 1 + Delta_A.
/// Also decomposes into projective + signalling + kappa terms, where
/// kappa = P~(n3, n2) - P(n3, n2); both routes must agree within 1e-10.
LgiResult correlator_K_ambiguous(const ProbabilityTables& tables, const AmbiguousDetector& det,
                                 std::span<const int> q2, std::span<const int> q3);

/// K_A assembled from cross terms: projective part + signalling part via gamma
/// + kappa(n3, n2) = sum_{n != n'} Gamma(n2, n, n') X(n3, n, n').
LgiResult correlator_K_ambiguous_via_X(const ExperimentProtocol& proto);

/// kappa(n3, n2) from cross terms; rows n3, columns n2.
RMatrix kappa_via_X(const ExperimentProtocol& proto);

/// Lower-bounded variant K' = -<Q2>_21 + <Q3 Q2>_321 - <Q3>_31 >= -1 - Delta_A,
/// with <Q2>_21 taken from the t2-only ambiguous run (checked against the
/// joint-run marginal).
LgiResult correlator_Kprime(const ProbabilityTables& tables, const AmbiguousDetector& det,
                            std::span<const int> q2, std::span<const int> q3);

/// <Q2>_21 reconstructed from the t2-only run and from the joint-run marginal.
struct Q2Marginals {
  double t2_only = 0.0;
  double joint_marginal = 0.0;
};
Q2Marginals ambiguous_q2_expectations(const ProbabilityTables& tables, const AmbiguousDetector& det,
                                      std::span<const int> q2);

/// Weak-measurement limit tr{[Q2 + {Q2, Q3}/2 - Q3] rho1} with Heisenberg-picture
/// observables built from the protocol's t2 basis and t3 measurement.
/// Throws UnsupportedOperation if meas2 is coarse-grained.
double weak_limit_K(const ExperimentProtocol& proto);

/// Convenience: the protocol's own q-labels.
LgiResult correlator_K(const ExperimentProtocol& proto, const ProbabilityTables& tables);
LgiResult correlator_K_ambiguous(const ExperimentProtocol& proto, const ProbabilityTables& tables);
LgiResult correlator_Kprime(const ExperimentProtocol& proto, const ProbabilityTables& tables);

}  // namespace lgsim
