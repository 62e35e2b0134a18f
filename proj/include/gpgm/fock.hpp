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

// Brute-force truncated Fock-space oracle for one (optionally two) modes.
//
// States are built in a padded working space of padding_factor·cutoff levels
// per mode by diagonalizing the truncated quadratic Hamiltonian
// ½(r̂ − r)ᵀH(r̂ − r). They are kept in spectral form (normalized log
// eigenvalues and eigenvectors) so that ρ^{±1/2} never goes through a
// numerically computed exponential. Results are compared on the leading
// cutoff^n block.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gpgm/ensemble.hpp"
#include "gpgm/gaussian_state.hpp"
#include "gpgm/instrument.hpp"
#include "gpgm/pgm.hpp"
#include "gpgm/quadrature.hpp"
#include "gpgm/symplectic.hpp"
#include "gpgm/types.hpp"

namespace gpgm {

struct OracleConfig {
  int cutoff = 40;          ///< levels per mode in the compared block
  int padding_factor = 3;   ///< working levels per mode = padding_factor·cutoff
  double tail_tol = 1e-10;  ///< allowed state mass in the outermost cutoff levels
  double floor = 1e-22;     ///< eigenvalues of ρ below this are dropped from ρ^{-1/2}
  double edge_tol = 1e-8;   ///< allowed trace share on ρ modes just above the floor
  bool allow_two_modes = false;
};

struct TruncatedOperator {
  int cutoff = 0;
  int modes = 1;
  CMatrix matrix;
  bool hermitian = false;
};

struct Quadratures {
  CMatrix x;
  CMatrix p;
};

/// x̂ = (a + a†)/√2, p̂ = i(a† − a)/√2 on levels 0..cutoff−1.
inline Quadratures quadratures(int cutoff) {
  if (cutoff < 2) throw PreconditionError("quadratures: cutoff must be at least 2");
  CMatrix a = CMatrix::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const CMatrix ad = a.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  return {s * (a + ad), Complex(0.0, s) * (ad - a)};
}

inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const TruncatedOperator& a, const TruncatedOperator& b) {
  if (a.matrix.rows() != b.matrix.rows()) throw DimensionError("trace_distance: operator sizes differ");
  return trace_distance(a.matrix, b.matrix);
}

namespace detail {

/// Product basis of `modes` modes with `levels` levels each; mode 0 is the slowest index.
struct FockSpace {
  int modes = 1;
  int levels = 0;
  int cutoff = 0;
  Eigen::Index dim = 0;
  std::vector<CMatrix> r;              ///< x̂₁, p̂₁, x̂₂, p̂₂, ...
  std::vector<Eigen::Index> block;     ///< states with every level < cutoff
  std::vector<Eigen::Index> shell;     ///< states with some level ≥ levels − cutoff
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline FockSpace make_space(int modes, int levels, int cutoff) {
  FockSpace s;
  s.modes = modes;
  s.levels = levels;
  s.cutoff = cutoff;
  s.dim = 1;
  for (int m = 0; m < modes; ++m) s.dim *= levels;
  const Quadratures q = quadratures(levels);
  const CMatrix id = CMatrix::Identity(levels, levels);
  for (int m = 0; m < modes; ++m) {
    for (const CMatrix* op : {&q.x, &q.p}) {
      CMatrix full = CMatrix::Identity(1, 1);
      for (int k = 0; k < modes; ++k) full = kron(full, k == m ? *op : id);
      s.r.push_back(std::move(full));
    }
  }
  for (Eigen::Index idx = 0; idx < s.dim; ++idx) {
    Eigen::Index rest = idx;
    int hi = 0;
    for (int m = 0; m < modes; ++m) {
      hi = std::max(hi, static_cast<int>(rest % levels));
      rest /= levels;
    }
    if (hi < cutoff) s.block.push_back(idx);
    if (hi >= levels - cutoff) s.shell.push_back(idx);
  }
  return s;
}

inline CMatrix take_block(const CMatrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  CMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

inline CMatrix take_rows(const CMatrix& m, const std::vector<Eigen::Index>& rows) {
  CMatrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

inline void validate_config(int modes, const OracleConfig& cfg) {
  if (cfg.cutoff < 2) throw PreconditionError("fock oracle: cutoff must be at least 2");
  if (cfg.padding_factor < 2) throw PreconditionError("fock oracle: padding_factor must be at least 2");
  if (modes == 2) {
    if (!cfg.allow_two_modes) throw PreconditionError("fock oracle: two-mode states need allow_two_modes");
    if (cfg.cutoff > 20) throw PreconditionError("fock oracle: two-mode cutoff is limited to 20");
  } else if (modes != 1) {
    throw PreconditionError("fock oracle: only one or two modes are supported");
  }
}

/// ρ = Σ_k λ_k |u_k⟩⟨u_k| with log λ normalized so that Σλ = 1.
struct SpectralState {
  Vector log_eig;
  CMatrix vecs;

  /// Σ_{λ_k > floor} λ_k^t |u_k⟩⟨u_k|; floor = 0 keeps everything.
  CMatrix power(double t, double floor = 0.0) const {
    const double log_floor = floor > 0.0 ? std::log(floor) : -HUGE_VAL;
    Vector d(log_eig.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = log_eig(k) > log_floor ? std::exp(t * log_eig(k)) : 0.0;
    return vecs * d.cast<Complex>().asDiagonal() * vecs.adjoint();
  }
};

/// Rough number of levels holding all but `tol` of a state's mass.
inline int levels_needed(const GaussianState& s, double tol) {
  const double nbar = 0.5 * (max_sym_eigenvalue(s.cov()) - 1.0) + 0.5 * s.mean().squaredNorm();
  const double q = nbar / (nbar + 1.0);
  if (q <= 0.0) return 1;
  return static_cast<int>(std::ceil(std::log(tol) / std::log(q)));
}

inline SpectralState spectral_state(const GaussianState& s, const FockSpace& sp, const OracleConfig& cfg) {
  s.require_faithful("fock oracle state");
  if (s.modes() != sp.modes) throw DimensionError("fock oracle: state mode count does not match the space");
  const Matrix h = hamiltonian_from_covariance(s.cov());
  const Eigen::Index d = sp.dim;
  const CMatrix id = CMatrix::Identity(d, d);
  std::vector<CMatrix> shifted;
  for (std::size_t i = 0; i < sp.r.size(); ++i) shifted.push_back(sp.r[i] - s.mean()(i) * id);
  CMatrix hop = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    CMatrix row = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < shifted.size(); ++j) row += h(i, j) * shifted[j];
    hop += 0.5 * shifted[i] * row;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(hop));
  if (es.info() != Eigen::Success) throw ConsistencyError("fock oracle: eigensolver failed");
  Vector lw = -es.eigenvalues();
  const double top = lw.maxCoeff();
  const double lse = top + std::log((lw.array() - top).exp().sum());
  SpectralState st{lw.array() - lse, es.eigenvectors()};

  double tail = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    double w = 0.0;
    for (Eigen::Index i : sp.shell) w += std::norm(st.vecs(i, k));
    tail += std::exp(st.log_eig(k)) * w;
  }
  if (tail > cfg.tail_tol) {
    // The shell starts (padding − 1)·cutoff levels up, but truncated quadratures roughly
    // halve the energy of the top working levels, so both bounds apply.
    const int need = levels_needed(s, cfg.tail_tol), spare = cfg.padding_factor - 1;
    const int suggested = std::max({cfg.cutoff + 1, (need + spare - 1) / spare,
                                    (2 * need + cfg.padding_factor - 1) / cfg.padding_factor});
    std::ostringstream os;
    os << "fock oracle: cutoff too small; state mass " << tail << " in the outer working levels exceeds "
       << cfg.tail_tol << " (try cutoff " << suggested << ")";
    throw CutoffError(os.str(), suggested);
  }
  return st;
}

struct Sandwich {
  CMatrix op;          ///< ρ^{-1/2} A ρ^{-1/2} in the Fock basis of the working space
  double edge_share;   ///< block-weighted share on retained ρ modes within a decade of the floor, a proxy for what was dropped
  double kept_trace;   ///< Σ over retained modes of ⟨u_k|A|u_k⟩
};

inline Sandwich inverse_sqrt_sandwich(const SpectralState& rho, const CMatrix& a, const FockSpace& sp,
                                      const OracleConfig& cfg) {
  const Eigen::Index d = rho.log_eig.size();
  const double log_floor = std::log(cfg.floor), log_edge = log_floor + std::log(10.0);
  Vector scale(d);
  for (Eigen::Index k = 0; k < d; ++k) scale(k) = rho.log_eig(k) > log_floor ? std::exp(-0.5 * rho.log_eig(k)) : 0.0;
  CMatrix inner = rho.vecs.adjoint() * a * rho.vecs;
  double kept = 0.0, total = 0.0, edge = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (scale(k) == 0.0) continue;
    kept += inner(k, k).real();
    // Only the part of mode k inside the compared block matters downstream.
    double in_block = 0.0;
    for (Eigen::Index i : sp.block) in_block += std::norm(rho.vecs(i, k));
    const double diag = scale(k) * scale(k) * inner(k, k).real() * in_block;
    total += diag;
    if (rho.log_eig(k) <= log_edge) edge += diag;
  }
  inner = scale.cast<Complex>().asDiagonal() * inner * scale.cast<Complex>().asDiagonal();
  Sandwich s{rho.vecs * inner * rho.vecs.adjoint(), total > 0.0 ? edge / total : 1.0, kept};
  if (s.edge_share > cfg.edge_tol) {
    std::ostringstream os;
    os << "fock oracle: cutoff too small; operator weight " << s.edge_share
       << " sits on density-matrix modes just above the eigenvalue floor (raise the cutoff or lower the floor)";
    throw CutoffError(os.str(), 2 * cfg.cutoff);
  }
  return s;
}

inline FockSpace working_space(int modes, const OracleConfig& cfg) {
  validate_config(modes, cfg);
  return make_space(modes, cfg.padding_factor * cfg.cutoff, cfg.cutoff);
}

inline TruncatedOperator to_block(const CMatrix& full, const FockSpace& sp, bool hermitian) {
  CMatrix b = take_block(full, sp.block, sp.block);
  if (hermitian) b = hermitize(b);
  return {sp.cutoff, sp.modes, std::move(b), hermitian};
}

}  // namespace detail

/// Leading cutoff^n block of the (working-space normalized) density matrix.
inline TruncatedOperator gaussian_density_matrix(const GaussianState& s, const OracleConfig& cfg = {}) {
  const auto sp = detail::working_space(s.modes(), cfg);
  return detail::to_block(detail::spectral_state(s, sp, cfg).power(1.0), sp, true);
}

/// D(r) = exp[i rᵀΩ r̂], exponentiated in the working space.
inline TruncatedOperator displacement_matrix(const Vector& r, const OracleConfig& cfg = {}) {
  if (r.size() % 2 != 0 || r.size() == 0) throw DimensionError("displacement_matrix: bad vector length");
  const int modes = static_cast<int>(r.size() / 2);
  const auto sp = detail::working_space(modes, cfg);
  const Vector w = omega_matrix(r.size()).transpose() * r;  // rᵀΩ as a column
  CMatrix g = CMatrix::Zero(sp.dim, sp.dim);
  for (std::size_t i = 0; i < sp.r.size(); ++i) g += w(i) * sp.r[i];
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(g));
  CVector ph(sp.dim);
  for (Eigen::Index k = 0; k < sp.dim; ++k) ph(k) = std::exp(Complex(0.0, es.eigenvalues()(k)));
  const CMatrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return detail::to_block(u, sp, false);
}

struct PgmOperator {
  TruncatedOperator E;   ///< p(x)ρ^{-1/2}ρ_xρ^{-1/2}, leading block
  double born = 0.0;     ///< Tr[E_x ρ] over the working space
  double edge_share = 0.0;
};

inline PgmOperator pgm_operator_direct(const GaussianEnsemble& e, const Vector& x, const OracleConfig& cfg = {}) {
  const auto sp = detail::working_space(e.modes(), cfg);
  const auto rho = detail::spectral_state(average_state(e), sp, cfg);
  const auto rho_x = detail::spectral_state(state_at(e, x), sp, cfg);
  const double p = prior_density(e, x);
  const auto s = detail::inverse_sqrt_sandwich(rho, rho_x.power(1.0), sp, cfg);
  return {detail::to_block(p * s.op, sp, true), p * s.kept_trace, s.edge_share};
}

struct InstrumentOutput {
  double t = 0.0;             ///< trace of the unnormalized output
  TruncatedOperator state;    ///< normalized output, leading block
  double edge_share = 0.0;
};

namespace detail {

struct InstrumentKernel {
  FockSpace sp;
  CMatrix K;  ///< ρ^{-1/2}τρ^{-1/2}
  double edge_share;
};

inline InstrumentKernel instrument_kernel(const GaussianEnsemble& e, const GaussianState& tau, const OracleConfig& cfg) {
  if (tau.dim() != e.dim()) throw DimensionError("instrument oracle: tau has the wrong mode count");
  require_loewner_below(tau.cov(), average_state(e).cov());
  auto sp = working_space(e.modes(), cfg);
  const auto rho = spectral_state(average_state(e), sp, cfg);
  const auto t = spectral_state(tau, sp, cfg);
  auto s = inverse_sqrt_sandwich(rho, t.power(1.0), sp, cfg);
  return {std::move(sp), std::move(s.op), s.edge_share};
}

}  // namespace detail

/// p(x)ρ_x^{1/2}ρ^{-1/2}τρ^{-1/2}ρ_x^{1/2}: its trace and its normalized leading block.
inline InstrumentOutput instrument_direct(const GaussianEnsemble& e, const GaussianState& tau, const Vector& x,
                                          const OracleConfig& cfg = {}) {
  const auto k = detail::instrument_kernel(e, tau, cfg);
  const CMatrix root = detail::spectral_state(state_at(e, x), k.sp, cfg).power(0.5);
  const CMatrix out = prior_density(e, x) * root * k.K * root;
  const double t = out.trace().real();
  return {t, detail::to_block(out / t, k.sp, true), k.edge_share};
}

/// ∫dx of the unnormalized direct instrument output on a tensor Gauss–Legendre grid
/// covering ±width standard deviations of t(x); nodes outside the width-σ ellipse are skipped.
inline TruncatedOperator expected_output_direct(const GaussianEnsemble& e, const GaussianState& tau,
                                                const OracleConfig& cfg = {}, int nodes = 32, double width = 6.0) {
  if (e.modes() != 1) throw PreconditionError("expected_output_direct: only one mode is supported");
  const auto k = detail::instrument_kernel(e, tau, cfg);
  const PGMDescription d = pgm_description(e);
  const Matrix jl_inv = (d.J * e.L()).inverse();
  const Vector center = e.mu() + jl_inv * (tau.mean() - d.anchor);
  const Matrix cov_x = jl_inv * (0.5 * (tau.cov() + d.sigma.cov())) * jl_inv.transpose();

  const QuadratureRule u = gauss_legendre(nodes, -1.0, 1.0);
  const double h0 = width * std::sqrt(cov_x(0, 0)), h1 = width * std::sqrt(cov_x(1, 1));
  CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(k.sp.block.size()), static_cast<Eigen::Index>(k.sp.block.size()));
  const Eigen::LLT<Matrix> metric(cov_x);
  Vector x(2);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      x << center(0) + h0 * u.nodes(i), center(1) + h1 * u.nodes(j);
      // corners of the box carry weight below e^{-width²/2}
      if ((x - center).dot(metric.solve(x - center)) > width * width) continue;
      const double w = u.weights(i) * h0 * u.weights(j) * h1 * prior_density(e, x);
      const CMatrix root = detail::spectral_state(state_at(e, x), k.sp, cfg).power(0.5);
      const CMatrix rows = detail::take_rows(root, k.sp.block);
      acc += w * rows * k.K * rows.adjoint();
    }
  }
  return {cfg.cutoff, 1, hermitize(acc), true};
}

struct CompletenessResult {
  double residual = 0.0;  ///< ‖∫E − I‖ on the interior block (spectral norm)
  int interior = 0;
  double box = 0.0;       ///< half-width of the outcome box
  int nodes = 0;
};

/// ∫ dy/(2π) D(−y)σD(y) over a nodes×nodes Gauss–Legendre grid on [−R, R]².
///
/// The y-integral factorizes: D(−y)σD(y) = D(0,b)† D(a,0)† σ D(a,0) D(0,b), and
/// D(a,0) = exp(iap̂), D(0,b) = exp(−ibx̂) are diagonal in the eigenbases of the
/// truncated p̂ and x̂, so each one-dimensional sum is elementwise there.
inline CompletenessResult completeness_check(const PGMDescription& d, int cutoff = 40, int nodes = 64,
                                             int working_factor = 5) {
  if (d.sigma.modes() != 1) throw PreconditionError("completeness_check: only one mode is supported");
  OracleConfig cfg;
  cfg.cutoff = cutoff;
  cfg.padding_factor = working_factor;
  const auto sp = detail::working_space(1, cfg);
  const CMatrix sigma = detail::spectral_state(d.sigma, sp, cfg).power(1.0);

  const double box = std::sqrt(cutoff + 1.0) + 8.0 * std::sqrt(0.5 * max_sym_eigenvalue(d.sigma.cov()));
  const QuadratureRule g = gauss_legendre(nodes, -box, box);
  const Eigen::Index w = sp.dim;

  auto sweep = [&](const CMatrix& q, const CMatrix& m, double sign) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(q));
    const Vector& ev = es.eigenvalues();
    const CMatrix& u = es.eigenvectors();
    // D = U diag(e^{i·sign·c·ev}) U†;  Σ_c w_c D† M D = U (M̃ ∘ Φ) U†,  Φ_kl = Σ_c w_c e^{i·sign·c(ev_l − ev_k)}
    CMatrix phi = CMatrix::Zero(w, w);
    for (Eigen::Index kk = 0; kk < w; ++kk)
      for (Eigen::Index l = 0; l < w; ++l) {
        Complex s(0.0, 0.0);
        const double diff = sign * (ev(l) - ev(kk));
        for (int c = 0; c < nodes; ++c) s += g.weights(c) * std::exp(Complex(0.0, g.nodes(c) * diff));
        phi(kk, l) = s;
      }
    const CMatrix mt = u.adjoint() * m * u;
    return CMatrix(u * mt.cwiseProduct(phi) * u.adjoint());
  };
  const CMatrix inner = sweep(sp.r[1], sigma, 1.0);          // over a, D(a,0) = exp(iap̂)
  const CMatrix total = sweep(sp.r[0], inner, -1.0) / (2.0 * kPi);  // over b, D(0,b) = exp(−ibx̂)

  const int m = cutoff / 2;
  const CMatrix diff = total.topLeftCorner(m, m) - CMatrix::Identity(m, m);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(diff), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().cwiseAbs().maxCoeff(), m, box, nodes};
}

}  // namespace gpgm
