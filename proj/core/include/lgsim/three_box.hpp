#pragma once

// Quantum three-box configuration: fixed unitaries, a four-response POVM at t2,
// and a coarse two-outcome measurement at t3 (+1 for "not C", -1 for C).

#include <array>

#include "lgsim/metrics.hpp"

namespace lgsim::threebox {

inline constexpr std::array<int, 3> kQ2{1, 1, -1};

UnitaryEvolution u21();
UnitaryEvolution u32();
RMatrix conditional_matrix();  ///< 4x3 c
AmbiguousDetector detector();  ///< c with the default left inverse
LabeledProjectorSet t2_basis();
LabeledProjectorSet t3_measurement();

ExperimentProtocol protocol(std::optional<AmbiguousDetector> det);

struct Result {
  ProbabilityTables tables;
  SignallingReport report;
  LgiResult k_prime;
  Q2Marginals q2;
  /// K' with the unambiguous detector in place of the POVM (bound -1 - Delta).
  LgiResult k_prime_unambiguous;
  SignallingReport report_unambiguous;
};

Result run();

}  // namespace lgsim::threebox
