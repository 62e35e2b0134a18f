// Copyright 2026 The gaussian-pgm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON ensemble specs and report helpers for the command-line tool.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gpgm/ensemble.hpp"
#include "gpgm/gaussian_state.hpp"
#include "gpgm/types.hpp"

namespace gpgm::io {

using json = nlohmann::json;

/// Malformed or inconsistent input file.
class InputError : public Error {
 public:
  using Error::Error;
};

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline json to_json(const GaussianState& s) { return {{"mean", to_json(s.mean())}, {"cov", to_json(s.cov())}}; }

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field \"" + key + "\"");
  return j.at(key);
}

inline Vector vector_from_json(const json& j, Eigen::Index len, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != len) {
    throw InputError(what + ": expected an array of " + std::to_string(len) + " numbers");
  }
  Vector v(len);
  for (Eigen::Index i = 0; i < len; ++i) {
    if (!j[i].is_number()) throw InputError(what + ": non-numeric entry");
    v(i) = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const json& j, Eigen::Index dim, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw InputError(what + ": expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) m.row(i) = vector_from_json(j[i], dim, what + " row").transpose();
  return m;
}

inline GaussianState state_from_json(const json& j, Eigen::Index dim, const std::string& what) {
  return GaussianState(vector_from_json(field(j, "mean", what), dim, what + ".mean"),
                       matrix_from_json(field(j, "cov", what), dim, what + ".cov"));
}

struct EnsembleSpec {
  json raw;
  GaussianEnsemble ensemble;
  std::optional<GaussianState> tau;
};

/// Parses and validates a version-1 spec. Physical validation errors
/// (non-faithful ρ₀, singular L, ...) propagate as library exceptions.
inline EnsembleSpec parse_spec(const json& j) {
  if (!j.is_object()) throw InputError("spec: top level must be an object");
  const json& version = field(j, "version", "spec");
  if (!version.is_number_integer() || version.get<int>() != 1) throw InputError("spec: unsupported version (expected 1)");
  const json& nj = field(j, "n", "spec");
  if (!nj.is_number_integer() || nj.get<int>() < 1) throw InputError("spec: n must be a positive integer");
  const Eigen::Index d = 2 * nj.get<int>();
  GaussianState rho0 = state_from_json(field(j, "rho0", "spec"), d, "rho0");
  GaussianEnsemble e(std::move(rho0), matrix_from_json(field(j, "L", "spec"), d, "L"),
                     vector_from_json(field(j, "mu", "spec"), d, "mu"), matrix_from_json(field(j, "Sigma", "spec"), d, "Sigma"));
  std::optional<GaussianState> tau;
  if (j.contains("tau")) tau = state_from_json(j.at("tau"), d, "tau");
  return {j, std::move(e), std::move(tau)};
}

inline json spec_to_json(const GaussianEnsemble& e, const std::optional<GaussianState>& tau = std::nullopt) {
  json j = {{"version", 1},     {"n", e.modes()},          {"rho0", to_json(e.rho0())},
            {"L", to_json(e.L())}, {"mu", to_json(e.mu())}, {"Sigma", to_json(e.Sigma())}};
  if (tau) j["tau"] = to_json(*tau);
  return j;
}

/// FNV-1a of the canonical dump, as 16 hex digits.
inline std::string digest(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

/// Named thresholds used by the verification commands.
class Tolerances {
 public:
  Tolerances()
      : values_{{"conjugation", 1e-9},          {"williamson", 1e-10},    {"roundtrip", 1e-10},
                {"det_identity", 1e-9},    {"sigma_tilde", 1e-9},    {"outcome_map", 1e-12},
                {"composition", 1e-8},     {"mse_forms", 1e-10},     {"trace_distance", 1e-6},
                {"born", 1e-6},            {"outcome_density", 1e-6}, {"expected_output", 1e-3},
                {"completeness", 1e-3},    {"z_score", 3.0}} {}

  double operator[](const std::string& key) const { return values_.at(key); }

  /// Applies "key=value"; unknown keys and unparsable values are input errors.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--tol-override expects key=value, got \"" + kv + "\"");
    const std::string key = kv.substr(0, eq);
    if (!values_.count(key)) throw InputError("--tol-override: unknown tolerance \"" + key + "\"");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != kv.size() - eq - 1 || !(v > 0.0)) {
      throw InputError("--tol-override: bad value for \"" + key + "\"");
    }
    values_[key] = v;
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, double> values_;
};

}  // namespace gpgm::io
