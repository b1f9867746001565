#include "lgsim/metrics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lgsim/error.hpp"

namespace lgsim {

namespace {

void check_labels(std::span<const int> q, Eigen::Index expected, const char* which) {
  if (static_cast<Eigen::Index>(q.size()) != expected) {
    std::ostringstream os;
    os << which << " has " << q.size() << " labels but the table has " << expected << " outcomes";
    throw ConfigError(os.str());
  }
  for (int v : q) {
    if (v != 1 && v != -1) throw InvalidParameter("q-labels must be +1 or -1");
  }
}

// w(n3, n2) = q(n2) + q(n2) q(n3) - q(n3): the weight of P(n3, n2) in K.
RMatrix k_weights(std::span<const int> q2, std::span<const int> q3) {
  RMatrix w(static_cast<Eigen::Index>(q3.size()), static_cast<Eigen::Index>(q2.size()));
  for (std::size_t m = 0; m < q3.size(); ++m) {
    for (std::size_t n = 0; n < q2.size(); ++n) {
      w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
          q2[n] + q2[n] * q3[m] - q3[m];
    }
  }
  return w;
}

double dot(std::span<const int> q, const RVector& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * v(static_cast<Eigen::Index>(i));
  return s;
}

void require_agreement(double a, double b, const char* what) {
  if (!(std::abs(a - b) <= tol::kProbability)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": independent routes disagree (" << a << " vs " << b << ")";
    throw NumericalError(os.str());
  }
}

bool above(double value, double bound) { return value > bound + tol::kViolation; }
bool below(double value, double bound) { return value < bound - tol::kViolation; }

const AmbiguousDetector& require_detector(const ExperimentProtocol& proto) {
  if (!proto.detector()) {
    throw UnsupportedOperation("protocol has no ambiguous detector at t2");
  }
  return *proto.detector();
}

void require_ambiguous(const ProbabilityTables& tables) {
  if (!tables.has_ambiguous()) {
    throw UnsupportedOperation("probability tables carry no ambiguous-detector run");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentProtocol

ExperimentProtocol::ExperimentProtocol(DensityMatrix rho1, UnitaryEvolution u21, UnitaryEvolution u32,
                                       LabeledProjectorSet meas2, std::optional<AmbiguousDetector> det2,
                                       LabeledProjectorSet meas3)
    : rho1_(std::move(rho1)),
      u21_(std::move(u21)),
      u32_(std::move(u32)),
      meas2_(std::move(meas2)),
      det2_(std::move(det2)),
      meas3_(std::move(meas3)),
      rho2_(rho1_) {
  const int m = rho1_.dim();
  if (u21_.dim() != m || u32_.dim() != m || meas2_.dim() != m || meas3_.dim() != m) {
    throw ConfigError("protocol components have mismatched dimensions");
  }
  if (det2_ && det2_->states() != meas2_.size()) {
    throw ConfigError("detector state count does not match the t2 basis");
  }
  rho2_ = evolve(rho1_, u21_);
}

ExperimentProtocol ExperimentProtocol::with_detector(std::optional<AmbiguousDetector> det) const {
  return ExperimentProtocol(rho1_, u21_, u32_, meas2_, std::move(det), meas3_);
}

// ---------------------------------------------------------------------------
// Tables

ProbabilityTables run_protocol(const ExperimentProtocol& proto) {
  const CMatrix& u = proto.u32().matrix();
  const CMatrix& rho2 = proto.rho2().matrix();
  const auto& m2 = proto.meas2();
  const auto& m3 = proto.meas3();
  const int k3 = m3.size();
  const int k2 = m2.size();

  std::vector<CMatrix> back(static_cast<std::size_t>(k3));
  for (int n3 = 0; n3 < k3; ++n3) back[static_cast<std::size_t>(n3)] = u.adjoint() * m3.projector(n3) * u;
  auto trace_back = [&](int n3, const CMatrix& state) {
    return clamp_probability((back[static_cast<std::size_t>(n3)] * state).trace().real());
  };

  ProbabilityTables t;
  t.p3.resize(k3);
  for (int n3 = 0; n3 < k3; ++n3) t.p3(n3) = trace_back(n3, rho2);

  t.p32.resize(k3, k2);
  t.p2.resize(k2);
  for (int n2 = 0; n2 < k2; ++n2) {
    const CMatrix branch = m2.projector(n2) * rho2 * m2.projector(n2);
    t.p2(n2) = clamp_probability(branch.trace().real());
    for (int n3 = 0; n3 < k3; ++n3) t.p32(n3, n2) = trace_back(n3, branch);
  }

  if (proto.detector()) {
    const KrausSet kraus = kraus_from_detector(*proto.detector(), m2);
    const int ma = kraus.size();
    t.p3alpha.resize(k3, ma);
    t.p2alpha.resize(ma);
    for (int a = 0; a < ma; ++a) {
      const CMatrix branch = kraus.op(a) * rho2 * kraus.op(a);
      t.p2alpha(a) = clamp_probability(branch.trace().real());
      for (int n3 = 0; n3 < k3; ++n3) t.p3alpha(n3, a) = trace_back(n3, branch);
    }
  } else {
    t.p3alpha.resize(k3, 0);
    t.p2alpha.resize(0);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Signalling

SignallingReport signalling_report(const ProbabilityTables& tables) {
  SignallingReport r;
  r.delta = tables.p3 - tables.p32.rowwise().sum();
  r.big_delta = r.delta.cwiseAbs().sum();
  if (tables.has_ambiguous()) {
    r.has_ambiguous = true;
    r.delta_a = tables.p3 - tables.p3alpha.rowwise().sum();
    r.d = r.delta - r.delta_a;
    r.big_delta_a = r.delta_a.cwiseAbs().sum();
  }
  return r;
}

SignallingReport signalling_report_via_X(const ExperimentProtocol& proto) {
  const AmbiguousDetector& det = require_detector(proto);
  const CrossTermTable x(proto.rho2(), proto.u32(), proto.meas2(), proto.meas3());
  const RMatrix gamma = gamma_coefficients(det);
  const int k3 = x.outcomes3();
  const int m = x.states();
  SignallingReport r;
  r.has_ambiguous = true;
  r.delta = RVector::Zero(k3);
  r.delta_a = RVector::Zero(k3);
  for (int n3 = 0; n3 < k3; ++n3) {
    double dsum = 0.0;
    double dasum = 0.0;
    for (int n = 0; n < m; ++n) {
      for (int np = 0; np < m; ++np) {
        if (n == np) continue;
        const double xr = x(n3, n, np).real();  // imaginary parts cancel pairwise
        dsum += xr;
        dasum += gamma(n, np) * xr;
      }
    }
    r.delta(n3) = dsum;
    r.delta_a(n3) = dasum;
  }
  r.d = r.delta - r.delta_a;
  r.big_delta = r.delta.cwiseAbs().sum();
  r.big_delta_a = r.delta_a.cwiseAbs().sum();
  return r;
}

// ---------------------------------------------------------------------------
// Correlators

double correlator_K_direct(const ProbabilityTables& tables, std::span<const int> q2,
                           std::span<const int> q3) {
  check_labels(q2, tables.p32.cols(), "q2");
  check_labels(q3, tables.p32.rows(), "q3");
  double e2 = 0.0;
  double e32 = 0.0;
  for (Eigen::Index m = 0; m < tables.p32.rows(); ++m) {
    for (Eigen::Index n = 0; n < tables.p32.cols(); ++n) {
      const double p = tables.p32(m, n);
      e2 += q2[static_cast<std::size_t>(n)] * p;
      e32 += q3[static_cast<std::size_t>(m)] * q2[static_cast<std::size_t>(n)] * p;
    }
  }
  const double e3 = dot(q3, tables.p3);
  return e2 + e32 - e3;
}

LgiResult correlator_K(const ProbabilityTables& tables, std::span<const int> q2,
                       std::span<const int> q3) {
  const double direct = correlator_K_direct(tables, q2, q3);
  const SignallingReport sig = signalling_report(tables);
  LgiResult r;
  r.decomposition.probability_term = k_weights(q2, q3).cwiseProduct(tables.p32).sum();
  r.decomposition.signalling_term = -dot(q3, sig.delta);
  r.value = r.decomposition.probability_term + r.decomposition.signalling_term;
  require_agreement(direct, r.value, "K");
  r.bound = 1.0 + sig.big_delta;
  r.violated = above(r.value, r.bound);
  return r;
}

RMatrix inferred_joint(const ProbabilityTables& tables, const AmbiguousDetector& det) {
  require_ambiguous(tables);
  if (det.responses() != tables.p3alpha.cols()) {
    throw ConfigError("detector response count does not match the ambiguous table");
  }
  return tables.p3alpha * det.d().transpose();
}

LgiResult correlator_K_ambiguous(const ProbabilityTables& tables, const AmbiguousDetector& det,
                                 std::span<const int> q2, std::span<const int> q3) {
  check_labels(q2, det.states(), "q2");
  check_labels(q3, tables.p3.size(), "q3");
  const RMatrix joint = inferred_joint(tables, det);
  const SignallingReport sig = signalling_report(tables);
  const RMatrix w = k_weights(q2, q3);
  const double signalling = -dot(q3, sig.delta_a);
  const double measured = w.cwiseProduct(joint).sum() + signalling;

  LgiResult r;
  r.decomposition.probability_term = w.cwiseProduct(tables.p32).sum();
  r.decomposition.signalling_term = signalling;
  r.decomposition.kappa_term = w.cwiseProduct(RMatrix(joint - tables.p32)).sum();
  r.value = measured;
  require_agreement(measured,
                    r.decomposition.probability_term + r.decomposition.signalling_term +
                        r.decomposition.kappa_term,
                    "K_A");
  r.bound = 1.0 + sig.big_delta_a;
  r.violated = above(r.value, r.bound);
  return r;
}

RMatrix kappa_via_X(const ExperimentProtocol& proto) {
  const AmbiguousDetector& det = require_detector(proto);
  const CrossTermTable x(proto.rho2(), proto.u32(), proto.meas2(), proto.meas3());
  const GammaTensor big_gamma(det);
  const int k3 = x.outcomes3();
  const int m = x.states();
  RMatrix kappa = RMatrix::Zero(k3, m);
  for (int n3 = 0; n3 < k3; ++n3) {
    for (int n2 = 0; n2 < m; ++n2) {
      double acc = 0.0;
      for (int n = 0; n < m; ++n) {
        for (int np = 0; np < m; ++np) {
          if (n != np) acc += big_gamma(n2, n, np) * x(n3, n, np).real();
        }
      }
      kappa(n3, n2) = acc;
    }
  }
  return kappa;
}

LgiResult correlator_K_ambiguous_via_X(const ExperimentProtocol& proto) {
  require_detector(proto);
  const auto& q2 = proto.meas2().q_labels();
  const auto& q3 = proto.meas3().q_labels();
  const CrossTermTable x(proto.rho2(), proto.u32(), proto.meas2(), proto.meas3());
  const int k3 = x.outcomes3();
  const int m = x.states();
  // Projective joint probabilities are the diagonal cross terms X(n3, n2, n2).
  RMatrix p32(k3, m);
  for (int n3 = 0; n3 < k3; ++n3) {
    for (int n2 = 0; n2 < m; ++n2) p32(n3, n2) = x(n3, n2, n2).real();
  }
  const SignallingReport sig = signalling_report_via_X(proto);
  const RMatrix w = k_weights(q2, q3);
  LgiResult r;
  r.decomposition.probability_term = w.cwiseProduct(p32).sum();
  r.decomposition.signalling_term = -dot(q3, sig.delta_a);
  r.decomposition.kappa_term = w.cwiseProduct(kappa_via_X(proto)).sum();
  r.value = r.decomposition.probability_term + r.decomposition.signalling_term +
            r.decomposition.kappa_term;
  r.bound = 1.0 + sig.big_delta_a;
  r.violated = above(r.value, r.bound);
  return r;
}

Q2Marginals ambiguous_q2_expectations(const ProbabilityTables& tables, const AmbiguousDetector& det,
                                      std::span<const int> q2) {
  require_ambiguous(tables);
  check_labels(q2, det.states(), "q2");
  const RVector from_t2 = det.d() * tables.p2alpha;
  const RVector from_joint = inferred_joint(tables, det).colwise().sum().transpose();
  return Q2Marginals{dot(q2, from_t2), dot(q2, from_joint)};
}

LgiResult correlator_Kprime(const ProbabilityTables& tables, const AmbiguousDetector& det,
                            std::span<const int> q2, std::span<const int> q3) {
  check_labels(q3, tables.p3.size(), "q3");
  const Q2Marginals e2 = ambiguous_q2_expectations(tables, det, q2);
  require_agreement(e2.t2_only, e2.joint_marginal, "<Q2>_21");
  const RMatrix joint = inferred_joint(tables, det);
  double e32 = 0.0;
  for (Eigen::Index m = 0; m < joint.rows(); ++m) {
    for (Eigen::Index n = 0; n < joint.cols(); ++n) {
      e32 += q3[static_cast<std::size_t>(m)] * q2[static_cast<std::size_t>(n)] * joint(m, n);
    }
  }
  const double e3 = dot(q3, tables.p3);
  const SignallingReport sig = signalling_report(tables);

  LgiResult r;
  r.lower_bound = true;
  r.value = -e2.t2_only + e32 - e3;
  // Same split as K: weights w'(n3, n2) = -q2 + q2 q3 - q3 on P(n3, n2), the
  // signalling term -sum q3 delta_A and the coherence remainder.
  double projective = 0.0;
  double kappa = 0.0;
  for (Eigen::Index m = 0; m < joint.rows(); ++m) {
    for (Eigen::Index n = 0; n < joint.cols(); ++n) {
      const int a = q2[static_cast<std::size_t>(n)];
      const int b = q3[static_cast<std::size_t>(m)];
      const double wp = -a + a * b - b;
      projective += wp * tables.p32(m, n);
      kappa += wp * (joint(m, n) - tables.p32(m, n));
    }
  }
  r.decomposition.probability_term = projective;
  r.decomposition.signalling_term = -dot(q3, sig.delta_a);
  r.decomposition.kappa_term = kappa;
  require_agreement(r.value, projective + r.decomposition.signalling_term + kappa, "K'");
  r.bound = -1.0 - sig.big_delta_a;
  r.violated = below(r.value, r.bound);
  return r;
}

double weak_limit_K(const ExperimentProtocol& proto) {
  const auto& m2 = proto.meas2();
  if (m2.size() != proto.dim()) {
    throw UnsupportedOperation("weak limit needs a full (rank-one) t2 basis");
  }
  const CMatrix& u21 = proto.u21().matrix();
  const CMatrix u31 = proto.u32().matrix() * u21;
  const CMatrix q2 = u21.adjoint() * m2.observable() * u21;
  const CMatrix q3 = u31.adjoint() * proto.meas3().observable() * u31;
  const CMatrix op = q2 + 0.5 * (q2 * q3 + q3 * q2) - q3;
  return (op * proto.rho1().matrix()).trace().real();
}

LgiResult correlator_K(const ExperimentProtocol& proto, const ProbabilityTables& tables) {
  return correlator_K(tables, proto.meas2().q_labels(), proto.meas3().q_labels());
}

LgiResult correlator_K_ambiguous(const ExperimentProtocol& proto, const ProbabilityTables& tables) {
  return correlator_K_ambiguous(tables, require_detector(proto), proto.meas2().q_labels(),
                                proto.meas3().q_labels());
}

LgiResult correlator_Kprime(const ExperimentProtocol& proto, const ProbabilityTables& tables) {
  return correlator_Kprime(tables, require_detector(proto), proto.meas2().q_labels(),
                           proto.meas3().q_labels());
}

}  // namespace lgsim
