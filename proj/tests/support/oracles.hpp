#pragma once

// Independent reference computations written with plain loops over matrix
// elements. They share no code paths with the library's Eigen expressions.

#include <complex>
#include <vector>

#include "lgsim/metrics.hpp"

namespace lgsim::testkit {

using cd = std::complex<double>;

/// tr(A B C D ...) style helper is avoided on purpose: everything below is
/// spelled out as index sums.
inline cd elem(const CMatrix& m, int i, int j) { return m(i, j); }

/// Evolves rho by an explicit double sum: (U rho U^dag)_{ij} = sum_kl U_ik rho_kl conj(U_jl).
inline CMatrix loop_evolve(const CMatrix& rho, const CMatrix& u) {
  const int n = static_cast<int>(rho.rows());
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cd acc = 0.0;
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) acc += elem(u, i, k) * elem(rho, k, l) * std::conj(elem(u, j, l));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Indices of the basis states covered by each projector (projectors in these
/// tests are diagonal in the computational basis).
inline std::vector<std::vector<int>> supports(const LabeledProjectorSet& meas) {
  std::vector<std::vector<int>> out;
  for (int k = 0; k < meas.size(); ++k) {
    std::vector<int> s;
    for (int i = 0; i < meas.dim(); ++i) {
      if (std::abs(meas.projector(k)(i, i)) > 0.5) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Probability of the t3 outcome with support `s3` for an (unnormalised)
/// branch state sigma evolved by u: sum_{i in s3} (u sigma u^dag)_{ii}.
inline double branch_probability(const CMatrix& sigma, const CMatrix& u, const std::vector<int>& s3) {
  const CMatrix ev = loop_evolve(sigma, u);
  double p = 0.0;
  for (int i : s3) p += ev(i, i).real();
  return p;
}

struct OracleTables {
  std::vector<double> p3;
  std::vector<std::vector<double>> p32;  // [n3][n2]
  std::vector<std::vector<double>> p3a;  // [n3][alpha]
};

/// Branch enumeration: builds every post-measurement branch explicitly by
/// element-wise scaling (Kraus operators are diagonal), evolves it and reads
/// off the t3 statistics.
inline OracleTables branch_tables(const ExperimentProtocol& proto) {
  const CMatrix rho2 = loop_evolve(proto.rho1().matrix(), proto.u21().matrix());
  const CMatrix& u = proto.u32().matrix();
  const auto s2 = supports(proto.meas2());
  const auto s3 = supports(proto.meas3());
  const int dim = proto.dim();
  OracleTables t;
  for (const auto& s : s3) t.p3.push_back(branch_probability(rho2, u, s));
  t.p32.assign(s3.size(), std::vector<double>(s2.size(), 0.0));
  for (std::size_t n2 = 0; n2 < s2.size(); ++n2) {
    CMatrix br = CMatrix::Zero(dim, dim);
    for (int i : s2[n2]) {
      for (int j : s2[n2]) br(i, j) = rho2(i, j);
    }
    for (std::size_t n3 = 0; n3 < s3.size(); ++n3) t.p32[n3][n2] = branch_probability(br, u, s3[n3]);
  }
  if (proto.detector()) {
    const auto& c = proto.detector()->c();
    const int ma = static_cast<int>(c.rows());
    // Kraus weight of basis state i in response a.
    auto w = [&](int a, int i) {
      for (std::size_t n = 0; n < s2.size(); ++n) {
        for (int k : s2[n]) {
          if (k == i) return std::sqrt(c(a, static_cast<Eigen::Index>(n)));
        }
      }
      return 0.0;
    };
    t.p3a.assign(s3.size(), std::vector<double>(static_cast<std::size_t>(ma), 0.0));
    for (int a = 0; a < ma; ++a) {
      CMatrix br(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) br(i, j) = w(a, i) * rho2(i, j) * w(a, j);
      }
      for (std::size_t n3 = 0; n3 < s3.size(); ++n3) {
        t.p3a[n3][static_cast<std::size_t>(a)] = branch_probability(br, u, s3[n3]);
      }
    }
  }
  return t;
}

/// X(n3, n, n') by explicit sums over the supports.
inline cd loop_cross_term(const ExperimentProtocol& proto, int n3, int n, int np) {
  const CMatrix rho2 = loop_evolve(proto.rho1().matrix(), proto.u21().matrix());
  const auto s2 = supports(proto.meas2());
  const auto s3 = supports(proto.meas3());
  const int dim = proto.dim();
  CMatrix sigma = CMatrix::Zero(dim, dim);
  for (int i : s2[static_cast<std::size_t>(n)]) {
    for (int j : s2[static_cast<std::size_t>(np)]) sigma(i, j) = rho2(i, j);
  }
  const CMatrix ev = loop_evolve(sigma, proto.u32().matrix());
  cd acc = 0.0;
  for (int i : s3[static_cast<std::size_t>(n3)]) acc += ev(i, i);
  return acc;
}

}  // namespace lgsim::testkit
