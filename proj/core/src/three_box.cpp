#include "lgsim/three_box.hpp"

#include <cmath>

namespace lgsim::threebox {

UnitaryEvolution u21() {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  RMatrix u(3, 3);
  u << 2, 0, r2,
      -1, r3, r2,
      -1, -r3, r2;
  return UnitaryEvolution((u / std::sqrt(6.0)).cast<Complex>());
}

UnitaryEvolution u32() {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  RMatrix u(3, 3);
  u << 1, 1, 2,
      r3, -r3, 0,
      r2, r2, -r2;
  return UnitaryEvolution((u / std::sqrt(6.0)).cast<Complex>());
}

RMatrix conditional_matrix() {
  RMatrix c(4, 3);
  c << 1, 0, 0,
      0, 1, 1,
      0, 1, 0,
      1, 0, 1;
  return 0.5 * c;
}

AmbiguousDetector detector() { return make_custom_detector(conditional_matrix()); }

LabeledProjectorSet t2_basis() {
  return LabeledProjectorSet::computational_basis({kQ2[0], kQ2[1], kQ2[2]}, {"A", "B", "C"});
}

LabeledProjectorSet t3_measurement() {
  return LabeledProjectorSet::coarse_grained(3, {{0, 1}, {2}}, {1, -1}, {"not C", "C"});
}

ExperimentProtocol protocol(std::optional<AmbiguousDetector> det) {
  return ExperimentProtocol(DensityMatrix::basis_state(3, 2), u21(), u32(), t2_basis(), std::move(det),
                            t3_measurement());
}

Result run() {
  const ExperimentProtocol proto = protocol(detector());
  Result r;
  r.tables = run_protocol(proto);
  r.report = signalling_report(r.tables);
  r.k_prime = correlator_Kprime(proto, r.tables);
  r.q2 = ambiguous_q2_expectations(r.tables, *proto.detector(), proto.meas2().q_labels());

  const ExperimentProtocol plain = proto.with_detector(make_unambiguous_detector(3));
  const ProbabilityTables t = run_protocol(plain);
  r.report_unambiguous = signalling_report(t);
  r.k_prime_unambiguous = correlator_Kprime(plain, t);
  return r;
}

}  // namespace lgsim::threebox
