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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpgm/checks.hpp"
#include "gpgm/fock.hpp"
#include "gpgm/instrument.hpp"
#include "gpgm/random.hpp"

using namespace gpgm;
using json = nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const Matrix I2 = Matrix::Identity(2, 2);

GaussianEnsemble scalar_ensemble() { return GaussianEnsemble(GaussianState::centered(2.0 * I2), I2, Vector::Zero(2), I2); }

std::vector<Vector> probes(const GaussianEnsemble& e) {
  std::vector<Vector> xs{e.mu()};
  for (Eigen::Index i = 0; i < e.dim(); ++i)
    for (double s : {0.5, -0.5}) {
      Vector x = e.mu();
      x(i) += s;
      xs.push_back(x);
    }
  return xs;
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared by the first two criteria.
struct OracleSweep {
  double worst_trace = 0.0;
  double worst_born = 0.0;
  int ensembles = 0;
  int redraws = 0;
  double seconds = 0.0;
};

OracleSweep oracle_sweep() {
  OracleSweep s;
  const auto t0 = std::chrono::steady_clock::now();
  auto run = [&](const GaussianEnsemble& e) {
    const PGMDescription d = pgm_description(e);
    for (const Vector& x : probes(e)) {
      const PgmOperator op = pgm_operator_direct(e, x);
      const TruncatedOperator closed = gaussian_density_matrix(povm_state(d, e, x));
      s.worst_trace = std::max(s.worst_trace, trace_distance(op.E.matrix, d.prefactor * closed.matrix));
      const double p = prior_density(e, x);
      s.worst_born = std::max(s.worst_born, std::abs(op.born - p) / p);
    }
    ++s.ensembles;
  };
  run(scalar_ensemble());
  std::mt19937_64 rng(20261016);
  while (s.ensembles < 21) {
    const GaussianEnsemble e = random_oracle_ensemble(rng);
    try {
      run(e);
    } catch (const CutoffError&) {
      // Truncation guard fired before any comparison; draw again.
      ++s.redraws;
    }
  }
  s.seconds = seconds_since(t0);
  return s;
}

Verdict oracle_equivalence(const OracleSweep& s) {
  const bool ok = s.worst_trace <= 1e-6 && s.seconds < 30.0;
  return {ok, "worst trace distance " + sci(s.worst_trace) + " over " + std::to_string(s.ensembles) +
                  " ensembles x 5 points, " + std::to_string(s.redraws) + " redraws, " + sci(s.seconds) + " s"};
}

Verdict born_rule(const OracleSweep& s) {
  return {s.worst_born <= 1e-6, "worst relative error " + sci(s.worst_born)};
}

Verdict mse_cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_forms = 0.0, worst_z = 0.0;
  bool ok = true;
  auto run = [&](const GaussianEnsemble& e, std::uint64_t seed) {
    const MseForms f = mse_forms(pgm_description(e), e);
    worst_forms = std::max(worst_forms, f.relative_difference);
    const MonteCarloEstimate mc = mse_monte_carlo(e, 1000000, seed);
    const double z = std::abs(mc.estimate - f.direct) / mc.standard_error;
    worst_z = std::max(worst_z, z);
    ok = ok && f.relative_difference <= 1e-10 && z <= 3.0;
  };
  const GaussianEnsemble scalar = scalar_ensemble();
  const double expected = 4.0 * (1.0 - 2.0 / std::sqrt(15.0));
  const double closed = mse_closed_form(scalar);
  ok = ok && std::abs(closed - expected) <= 1e-12;
  run(scalar, 1);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) run(random_ensemble(rng, 1 + k % 3), 100 + k);
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {ok, "scalar closed form " + std::to_string(closed) + ", worst form mismatch " + sci(worst_forms) +
                  ", worst |z| " + std::to_string(worst_z) + " over 11 ensembles, " + sci(secs) + " s"};
}

Verdict instrument_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const GaussianEnsemble e = scalar_ensemble();
  const GaussianState tau = GaussianState::centered(2.0 * I2);
  const InstrumentDescription d = instrument_description(e, tau);
  double worst_state = 0.0, worst_t = 0.0;
  for (const Vector& x : probes(e)) {
    const InstrumentOutput out = instrument_direct(e, tau, x);
    worst_state = std::max(worst_state, trace_distance(out.state, gaussian_density_matrix(post_measurement_state(d, x))));
    const double t = outcome_density(d, e, x);
    worst_t = std::max(worst_t, std::abs(out.t - t) / t);
  }
  const double avg = trace_distance(expected_output_direct(e, tau), gaussian_density_matrix(expected_output_state(d)));
  const double secs = seconds_since(t0);
  const bool ok = worst_state <= 1e-6 && worst_t <= 1e-6 && avg <= 1e-3 && secs < 120.0;
  return {ok, "state " + sci(worst_state) + ", density " + sci(worst_t) + ", expected output " + sci(avg) + ", " +
                  sci(secs) + " s"};
}

Verdict matrix_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  double conj = 0.0, will = 0.0, round = 0.0, det = 0.0, comp = 0.0;
  for (int k = 0; k < 100; ++k) {
    const GaussianEnsemble e = random_ensemble(rng, 1 + k % 4);
    const PGMDescription d = pgm_description(e);
    for (const Matrix* v : {&e.rho0().cov(), &d.rho.cov(), &d.sigma.cov()}) {
      conj = std::max(conj, conjugation_identity_residual(*v));
      const WilliamsonResiduals wr = williamson_residuals(*v, williamson(*v));
      will = std::max({will, wr.symplectic, wr.reconstruction});
      const Matrix back = covariance_from_hamiltonian(hamiltonian_from_covariance(*v));
      round = std::max(round, (back - *v).norm() / v->norm());
      const CMatrix w = cayley_w(*v);
      round = std::max(round, (cayley_inverse(cayley_forward(w)) - w).norm() / w.norm());
    }
    det = std::max(det, identity_checks(e).det_identity);
    comp = std::max(comp, pgm_composition_check(d, e, e.mu() + random_vector(rng, e.dim(), 0.5)).worst());
  }
  const double secs = seconds_since(t0);
  const bool ok = conj <= 1e-9 && will <= 1e-10 && round <= 1e-10 && det <= 1e-9 && comp <= 1e-8 && secs < 30.0;
  return {ok, "conjugation " + sci(conj) + ", williamson " + sci(will) + ", roundtrips " + sci(round) + ", det " +
                  sci(det) + ", composition " + sci(comp) + ", " + sci(secs) + " s"};
}

Verdict definiteness() {
  std::mt19937_64 rng(6);
  double max_one_minus_j = -1e300, min_one_minus_j6 = 1e300, min_margin = 1e300;
  for (int k = 0; k < 100; ++k) {
    const GaussianEnsemble e = random_ensemble(rng, 1 + k % 4);
    const IdentityReport ir = identity_checks(e);
    const InstrumentDescription d = instrument_description(e, random_admissible_tau(rng, e));
    const InstrumentChecks ic = instrument_checks(d, e);
    max_one_minus_j = std::max(max_one_minus_j, ir.one_minus_j_max_eigenvalue);
    min_one_minus_j6 = std::min(min_one_minus_j6, ic.one_minus_j6_min_eigenvalue);
    min_margin = std::min({min_margin, ir.sigma_margin, ic.v5_margin, ic.rho7_margin, ic.tau_tilde_margin});
  }
  const bool ok = max_one_minus_j < 0.0 && min_one_minus_j6 > 0.0 && min_margin > kFaithfulTolerance;
  return {ok, "max eig (I-J)(V_rho-V_0) " + sci(max_one_minus_j) + ", min eig (I-J6)(V5+V_0) " + sci(min_one_minus_j6) +
                  ", min nu-1 " + sci(min_margin)};
}

Verdict completeness() {
  const PGMDescription d = pgm_description(scalar_ensemble());
  std::vector<double> r;
  for (int k : {16, 32, 64}) r.push_back(completeness_check(d, 40, k).residual);
  const bool ok = r[2] <= 1e-3 && r[1] < r[0] && r[2] <= r[1];
  return {ok, "residual " + sci(r[0]) + " / " + sci(r[1]) + " / " + sci(r[2]) + " at 16 / 32 / 64 nodes"};
}

std::string capture(const std::string& cmd, int& code) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Verdict determinism() {
  const std::string cmd = std::string(GPGM_CLI_PATH) + " mse " + GPGM_TEST_DATA + "/squeezed.json --trials 100000 --seed 4242";
  bool ok = true;
  std::string detail;
  for (const char* extra : {"", " --workers 3"}) {
    int c1 = 0, c2 = 0;
    json a = json::parse(capture(cmd + extra, c1), nullptr, false);
    json b = json::parse(capture(cmd + extra, c2), nullptr, false);
    if (c1 != 0 || c2 != 0 || a.is_discarded() || b.is_discarded()) return {false, "mse command failed"};
    a.erase("timing");
    b.erase("timing");
    const bool same = a.dump() == b.dump();
    ok = ok && same;
    detail += std::string(*extra ? "3 workers " : "1 worker ") + (same ? "identical" : "differ") + "; ";
  }
  return {ok, detail + "reports compared without the timing block"};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;
  std::optional<OracleSweep> sweep;
  auto shared = [&]() -> const OracleSweep& {
    if (!sweep) sweep = oracle_sweep();
    return *sweep;
  };
  criteria.emplace_back("PGM Fock oracle equivalence", [&] { return oracle_equivalence(shared()); });
  criteria.emplace_back("Born rule", [&] { return born_rule(shared()); });
  criteria.emplace_back("MSE closed forms and Monte Carlo", mse_cross_validation);
  criteria.emplace_back("instrument Fock oracle equivalence", instrument_equivalence);
  criteria.emplace_back("matrix identity suite", matrix_identities);
  criteria.emplace_back("definiteness suite", definiteness);
  criteria.emplace_back("POVM completeness", completeness);
  criteria.emplace_back("CLI determinism", determinism);

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << "criterion " << k + 1 << " " << criteria[k].first << ": " << (v.pass ? "PASS" : "FAIL") << " ("
              << v.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
