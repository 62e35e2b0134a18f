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

// Subcommand implementations. Each returns a JSON report and an exit code;
// main() owns argument parsing and output.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gpgm/checks.hpp"
#include "gpgm/fock.hpp"
#include "gpgm/instrument.hpp"
#include "gpgm/pgm.hpp"
#include "gpgm/symplectic.hpp"
#include "spec_io.hpp"

namespace gpgm::cli {

using io::json;

enum ExitCode { kOk = 0, kVerifyFailed = 1, kInputError = 2 };

struct Outcome {
  json report;
  int exit_code = kOk;
};

struct Options {
  std::int64_t trials = 0;
  std::uint64_t seed = 12345;
  unsigned workers = 1;
  int cutoff = 40;
  std::string level = "full";
  std::vector<double> x;
  int count = 10;
  io::Tolerances tol;
};

inline json margins(const Matrix& v) {
  const UncertaintyCheck c = check_uncertainty(v);
  return {{"status", to_string(c.status)}, {"margin", c.margin}};
}

inline Vector x_or_mu(const Options& o, const GaussianEnsemble& e) {
  if (o.x.empty()) return e.mu();
  if (static_cast<Eigen::Index>(o.x.size()) != e.dim()) {
    throw io::InputError("--x: expected " + std::to_string(e.dim()) + " components");
  }
  return Eigen::Map<const Vector>(o.x.data(), e.dim());
}

inline Outcome describe_pgm(const io::EnsembleSpec& s, const Options&) {
  const PGMDescription d = pgm_description(s.ensemble);
  json r;
  r["V_sigma"] = io::to_json(d.sigma.cov());
  r["J"] = io::to_json(d.J);
  r["anchor"] = io::to_json(d.anchor);
  r["prefactor"] = d.prefactor;
  r["V_rho"] = io::to_json(d.rho.cov());
  r["faithfulness"] = {{"rho0", margins(s.ensemble.rho0().cov())},
                       {"rho", margins(d.rho.cov())},
                       {"sigma", margins(d.sigma.cov())}};
  return {{{"results", r}}, kOk};
}

inline Outcome mse(const io::EnsembleSpec& s, const Options& o) {
  const GaussianEnsemble& e = s.ensemble;
  const PGMDescription d = pgm_description(e);
  const MseForms f = mse_forms(d, e);
  json r = {{"closed_form", f.direct}, {"closed_form_via_J", f.via_j}};
  json res = {{"mse_forms", f.relative_difference}};
  if (f.relative_difference > o.tol["mse_forms"]) {
    return {{{"results", r}, {"residuals", res}, {"error", {{"type", "consistency"}, {"message", "closed forms disagree"}}}}, kVerifyFailed};
  }
  if (o.trials > 0) {
    const MonteCarloEstimate mc = mse_monte_carlo(e.mu(), e.Sigma(), conditional_outcome(d, e), o.trials, o.seed, o.workers);
    const double z = mc.standard_error > 0.0 ? (mc.estimate - f.direct) / mc.standard_error : 0.0;
    r["monte_carlo"] = {{"trials", mc.trials},
                        {"workers", o.workers},
                        {"estimate", mc.estimate},
                        {"standard_error", mc.standard_error},
                        {"z_score", z},
                        {"within_tolerance", std::abs(z) <= o.tol["z_score"]}};
  }
  return {{{"results", r}, {"residuals", res}}, kOk};
}

inline Outcome instrument(const io::EnsembleSpec& s, const Options& o) {
  if (!s.tau) throw io::InputError("instrument: spec has no \"tau\" state");
  const GaussianEnsemble& e = s.ensemble;
  const InstrumentDescription d = instrument_description(e, *s.tau);
  const GaussianState tt = expected_output_state(d);
  json r;
  r["V5"] = io::to_json(d.V5);
  r["J5"] = io::to_json(d.J5);
  r["J6"] = io::to_json(d.J6);
  r["J7"] = io::to_json(d.J7);
  r["rho7"] = io::to_json(d.rho7);
  r["z_matrix"] = io::to_json(d.z_matrix);
  r["tau_tilde"] = io::to_json(tt);
  r["outcome_cov"] = io::to_json(d.outcome_cov());
  if (!o.x.empty()) {
    const Vector x = x_or_mu(o, e);
    r["x"] = io::to_json(x);
    r["post_measurement_state"] = io::to_json(post_measurement_state(d, x));
    r["t"] = outcome_density(d, e, x);
  }
  const InstrumentChecks c = instrument_checks(d, e);
  json res = {{"one_minus_j6_min_eigenvalue", c.one_minus_j6_min_eigenvalue},
              {"V5_margin", c.v5_margin},
              {"rho7_margin", c.rho7_margin},
              {"tau_tilde_margin", c.tau_tilde_margin},
              {"J7_forms", c.j7_forms}};
  return {{{"results", r}, {"residuals", res}}, kOk};
}

inline Outcome sample(const io::EnsembleSpec& s, const Options& o) {
  if (o.count < 1) throw io::InputError("sample: --count must be positive");
  const GaussianEnsemble& e = s.ensemble;
  const PGMDescription d = pgm_description(e);
  const ConditionalOutcome c = conditional_outcome(d, e);
  const Matrix lq = Eigen::LLT<Matrix>(c.cov).matrixL();
  std::optional<InstrumentDescription> in;
  if (s.tau) in = instrument_description(e, *s.tau);
  std::mt19937_64 rng = worker_stream(o.seed, 0);
  json rows = json::array();
  for (int k = 0; k < o.count; ++k) {
    const Vector x = sample_prior(e, rng);
    const Vector xt = c.mean_at(x) + lq * standard_normal(rng, e.dim());
    json row = {{"x", io::to_json(x)}, {"y", io::to_json(outcome_from_parameter(d, e, x))}, {"x_tilde", io::to_json(xt)}};
    if (in) row["t"] = outcome_density(*in, e, x);
    rows.push_back(row);
  }
  return {{{"results", {{"samples", rows}}}}, kOk};
}

struct CheckList {
  json items = json::array();
  bool ok = true;

  /// Records value ≤ tol (or the predicate's verdict).
  void add(const std::string& name, double value, double tol) { add(name, value, tol, value <= tol); }
  void add(const std::string& name, double value, double tol, bool pass) {
    items.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
    ok = ok && pass;
  }
};

inline void algebra_checks(const std::string& label, const Matrix& v, const Options& o, CheckList& out) {
  const WilliamsonDecomposition w = williamson(v);
  const WilliamsonResiduals wr = williamson_residuals(v, w);
  out.add(label + ".williamson_symplectic", wr.symplectic, o.tol["williamson"]);
  out.add(label + ".williamson_reconstruction", wr.reconstruction, o.tol["williamson"]);
  out.add(label + ".conjugation_residual", conjugation_identity_residual(v), o.tol["conjugation"]);
  const Matrix back = covariance_from_hamiltonian(hamiltonian_from_covariance(v));
  out.add(label + ".hamiltonian_roundtrip", (back - v).norm() / v.norm(), o.tol["roundtrip"]);
  const CMatrix wc = cayley_w(v);
  out.add(label + ".cayley_roundtrip", (cayley_inverse(cayley_forward(wc)) - wc).norm() / wc.norm(), o.tol["roundtrip"]);
}

inline std::vector<Vector> probe_points(const GaussianEnsemble& e) {
  std::vector<Vector> xs{e.mu()};
  for (Eigen::Index i = 0; i < e.dim(); ++i) {
    for (double sgn : {0.5, -0.5}) {
      Vector x = e.mu();
      x(i) += sgn;
      xs.push_back(x);
    }
  }
  return xs;
}

inline Outcome verify(const io::EnsembleSpec& s, const Options& o) {
  if (o.level != "fast" && o.level != "full") throw io::InputError("verify: --level must be fast or full");
  const GaussianEnsemble& e = s.ensemble;
  const PGMDescription d = pgm_description(e);
  CheckList checks;
  json skipped = json::array();

  algebra_checks("rho0", e.rho0().cov(), o, checks);
  algebra_checks("rho", d.rho.cov(), o, checks);
  algebra_checks("sigma", d.sigma.cov(), o, checks);

  const IdentityReport ir = identity_checks(e);
  checks.add("det_identity", ir.det_identity, o.tol["det_identity"]);
  checks.add("one_minus_j_max_eigenvalue", ir.one_minus_j_max_eigenvalue, 0.0, ir.one_minus_j_max_eigenvalue < 0.0);
  checks.add("sigma_tilde_forms", ir.sigma_tilde_forms, o.tol["sigma_tilde"]);
  checks.add("outcome_map", ir.outcome_map, o.tol["outcome_map"]);
  checks.add("sigma_margin", ir.sigma_margin, 0.0, ir.sigma_margin > kFaithfulTolerance);
  checks.add("mse_forms", ir.mse.relative_difference, o.tol["mse_forms"]);

  const std::vector<Vector> xs = probe_points(e);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    checks.add("pgm_composition[" + std::to_string(k) + "]", pgm_composition_check(d, e, xs[k]).worst(), o.tol["composition"]);
  }

  std::optional<InstrumentDescription> in;
  if (s.tau) {
    in = instrument_description(e, *s.tau);
    const InstrumentChecks ic = instrument_checks(*in, e);
    checks.add("one_minus_j6_min_eigenvalue", ic.one_minus_j6_min_eigenvalue, 0.0, ic.one_minus_j6_min_eigenvalue > 0.0);
    checks.add("V5_margin", ic.v5_margin, 0.0, ic.v5_margin > kFaithfulTolerance);
    checks.add("rho7_margin", ic.rho7_margin, 0.0, ic.rho7_margin > kFaithfulTolerance);
    checks.add("tau_tilde_margin", ic.tau_tilde_margin, 0.0, ic.tau_tilde_margin > kFaithfulTolerance);
    checks.add("J7_forms", ic.j7_forms, o.tol["sigma_tilde"]);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      checks.add("instrument_composition[" + std::to_string(k) + "]", instrument_composition_check(*in, e, xs[k]).worst(),
                 o.tol["composition"]);
    }
  } else {
    skipped.push_back("instrument checks: no tau in spec");
  }

  if (o.level == "fast") {
    skipped.push_back("fock oracle suite: --level fast");
  } else if (e.modes() != 1) {
    skipped.push_back("fock oracle suite: needs n = 1");
  } else {
    OracleConfig cfg;
    cfg.cutoff = o.cutoff;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const PgmOperator p = pgm_operator_direct(e, xs[k], cfg);
      TruncatedOperator c = gaussian_density_matrix(povm_state(d, e, xs[k]), cfg);
      c.matrix *= d.prefactor;
      const double px = prior_density(e, xs[k]);
      checks.add("fock_pgm_trace_distance[" + std::to_string(k) + "]", trace_distance(p.E, c), o.tol["trace_distance"]);
      checks.add("fock_born_rule[" + std::to_string(k) + "]", std::abs(p.born - px) / px, o.tol["born"]);
    }
    if (in) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const InstrumentOutput out = instrument_direct(e, *s.tau, xs[k], cfg);
        const double t = outcome_density(*in, e, xs[k]);
        checks.add("fock_instrument_trace_distance[" + std::to_string(k) + "]",
                   trace_distance(out.state, gaussian_density_matrix(post_measurement_state(*in, xs[k]), cfg)),
                   o.tol["trace_distance"]);
        checks.add("fock_outcome_density[" + std::to_string(k) + "]", std::abs(out.t - t) / t, o.tol["outcome_density"]);
      }
      const TruncatedOperator avg = expected_output_direct(e, *s.tau, cfg);
      checks.add("fock_expected_output", trace_distance(avg, gaussian_density_matrix(expected_output_state(*in), cfg)),
                 o.tol["expected_output"]);
    }
    const CompletenessResult cr = completeness_check(d, o.cutoff, 64);
    checks.add("fock_completeness", cr.residual, o.tol["completeness"]);
  }
  json r = {{"checks", checks.items}, {"skipped", skipped}, {"all_passed", checks.ok}};
  return {{{"results", r}}, checks.ok ? kOk : kVerifyFailed};
}

}  // namespace gpgm::cli
