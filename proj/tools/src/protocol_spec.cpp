#include "lgsim_cli/protocol_spec.hpp"

#include <set>
#include <string>

#include "lgsim/error.hpp"

namespace lgsim::cli {

namespace {

void only_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + " needs '" + key + "'");
  return obj[key];
}

Complex entry(const nlohmann::json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + ": entries must be numbers or [re, im] pairs");
}

CMatrix complex_matrix(const nlohmann::json& v, int rows, int cols, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows) {
    throw ConfigError(where + " must have " + std::to_string(rows) + " rows");
  }
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ConfigError(where + " row " + std::to_string(r) + " must have " + std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = entry(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

RMatrix real_matrix(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
    throw ConfigError(where + " must be a non-empty list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  RMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(where + " rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = row[static_cast<std::size_t>(c)];
      if (!e.is_number()) throw ConfigError(where + " entries must be numbers");
      m(r, c) = e.get<double>();
    }
  }
  return m;
}

std::vector<int> labels(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be a list of +1/-1 labels");
  std::vector<int> q;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(where + " labels must be integers");
    q.push_back(e.get<int>());
  }
  return q;
}

DensityMatrix initial_state(const nlohmann::json& v, int dim) {
  only_keys(v, {"basis", "pure", "matrix"}, "rho1");
  if (v.size() != 1) throw ConfigError("rho1 needs exactly one of 'basis', 'pure', 'matrix'");
  if (v.contains("basis")) {
    if (!v["basis"].is_number_integer()) throw ConfigError("rho1.basis must be an integer index");
    const int n = v["basis"].get<int>();
    if (n < 0 || n >= dim) throw ConfigError("rho1.basis index out of range");
    return DensityMatrix::basis_state(dim, n);
  }
  if (v.contains("pure")) {
    const auto& p = v["pure"];
    if (!p.is_array() || static_cast<int>(p.size()) != dim) {
      throw ConfigError("rho1.pure must have " + std::to_string(dim) + " amplitudes");
    }
    CVector psi(dim);
    for (int i = 0; i < dim; ++i) psi(i) = entry(p[static_cast<std::size_t>(i)], "rho1.pure");
    return DensityMatrix::pure(psi);
  }
  return DensityMatrix(complex_matrix(v["matrix"], dim, dim, "rho1.matrix"));
}

}  // namespace

AmbiguousDetector detector_from_json(const nlohmann::json& spec, int states) {
  if (spec.contains("family")) {
    only_keys(spec, {"family", "epsilon"}, "detector");
    if (!spec["family"].is_string()) throw ConfigError("detector.family must be a string");
    const std::string fam = spec["family"].get<std::string>();
    if (fam == "inverted") return make_inverted_detector(states);
    if (fam == "unambiguous") return make_unambiguous_detector(states);
    if (fam == "weak") {
      const auto& e = require(spec, "epsilon", "weak detector");
      if (!e.is_number()) throw ConfigError("detector.epsilon must be a number");
      return make_weak_detector(states, e.get<double>());
    }
    throw ConfigError("unknown detector family '" + fam + "'");
  }
  only_keys(spec, {"c", "d"}, "detector");
  const RMatrix c = real_matrix(require(spec, "c", "detector"), "detector.c");
  if (c.cols() != states) {
    throw ConfigError("detector.c must have one column per t2 state (" + std::to_string(states) + ")");
  }
  std::optional<RMatrix> d;
  if (spec.contains("d")) d = real_matrix(spec["d"], "detector.d");
  return make_custom_detector(c, d);
}

ExperimentProtocol protocol_from_json(const nlohmann::json& spec) {
  only_keys(spec, {"dim", "rho1", "u21", "u32", "q2", "meas3", "detector"}, "protocol");
  const auto& dim_v = require(spec, "dim", "protocol");
  if (!dim_v.is_number_integer()) throw ConfigError("protocol.dim must be an integer");
  const int dim = dim_v.get<int>();
  if (dim < 2 || dim > 16) throw ConfigError("protocol.dim must lie in [2, 16]");

  DensityMatrix rho = initial_state(require(spec, "rho1", "protocol"), dim);
  UnitaryEvolution u21(complex_matrix(require(spec, "u21", "protocol"), dim, dim, "u21"));
  UnitaryEvolution u32(complex_matrix(require(spec, "u32", "protocol"), dim, dim, "u32"));
  auto meas2 = LabeledProjectorSet::computational_basis(labels(require(spec, "q2", "protocol"), "q2"));
  if (meas2.dim() != dim) throw ConfigError("q2 must have one label per basis state");

  const auto& m3 = require(spec, "meas3", "protocol");
  only_keys(m3, {"q", "groups"}, "meas3");
  const std::vector<int> q3 = labels(require(m3, "q", "meas3"), "meas3.q");
  std::optional<LabeledProjectorSet> meas3;
  if (m3.contains("groups")) {
    const auto& g = m3["groups"];
    if (!g.is_array()) throw ConfigError("meas3.groups must be a list of index lists");
    std::vector<std::vector<int>> groups;
    for (const auto& grp : g) groups.push_back(labels(grp, "meas3.groups"));
    meas3.emplace(LabeledProjectorSet::coarse_grained(dim, groups, q3));
  } else {
    meas3.emplace(LabeledProjectorSet::computational_basis(q3));
    if (meas3->dim() != dim) throw ConfigError("meas3.q must have one label per basis state");
  }

  std::optional<AmbiguousDetector> det;
  if (spec.contains("detector") && !spec["detector"].is_null()) {
    det = detector_from_json(spec["detector"], dim);
  }
  return ExperimentProtocol(std::move(rho), std::move(u21), std::move(u32), std::move(meas2),
                            std::move(det), std::move(*meas3));
}

}  // namespace lgsim::cli
