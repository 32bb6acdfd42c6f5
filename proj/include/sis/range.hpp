#pragma once

// Range functions and fiber Gramians. At each torus point sigma the fiber
// system { pi~_sigma(k) T phi(sigma) : phi, k } spans J(sigma); frame and
// Riesz constants of the lattice translates are the extreme Gramian
// eigenvalues over sigma.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sis/action.hpp"
#include "sis/error.hpp"
#include "sis/parallel.hpp"
#include "sis/transform.hpp"

namespace sis {

inline constexpr double default_rank_rel_tol = 1e-9;

enum class BoundsMode { frame, riesz, bessel };

inline std::string to_string(BoundsMode m) {
  switch (m) {
    case BoundsMode::frame: return "frame";
    case BoundsMode::riesz: return "riesz";
    case BoundsMode::bessel: return "bessel";
  }
  return "?";
}

inline BoundsMode parse_mode(const std::string& s) {
  if (s == "frame") return BoundsMode::frame;
  if (s == "riesz") return BoundsMode::riesz;
  if (s == "bessel") return BoundsMode::bessel;
  throw InputError("unknown bounds mode '" + s + "'");
}

/// pi~_sigma(k) T phi(sigma) for every generator and k, generator-major.
inline std::vector<FiberVector> fiber_system(std::size_t s, const TranslateSystem& sys) {
  const Layout& l = *sys.layout;
  std::vector<FiberVector> out;
  out.reserve(sys.n_fiber_vectors());
  for (const auto& phi : sys.generators)
    for (const auto& k : sys.gamma1) out.push_back(fiber_action(l, s, k, phi.fibers[s]));
  return out;
}

/// Columns are the flattened vectors; column inner products equal fiber_inner.
inline Eigen::MatrixXcd as_columns(const Layout& layout, const std::vector<FiberVector>& vs) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(layout.fiber_dim()),
                     static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = flatten(layout, vs[i]);
  return m;
}

/// G[i][j] = <v_j, v_i>, symmetrized.
inline Eigen::MatrixXcd gramian(const Layout& layout, const std::vector<FiberVector>& vs) {
  if (vs.empty()) throw InputError("gramian: empty vector list");
  const auto v = as_columns(layout, vs);
  Eigen::MatrixXcd g = v.adjoint() * v;
  return (g + g.adjoint()) / 2.0;
}

struct FiberBounds {
  std::optional<double> A;  // unset in bessel mode
  double B = 0.0;
  std::size_t rank = 0;
  std::vector<double> eigenvalues;  // descending
};

/// Spectrum of G, descending.
inline std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DegenerateError("eigensolver failed to converge");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::reverse(ev.begin(), ev.end());
  return ev;
}

/// Frame bounds of the span (nonzero spectrum), Riesz bounds (whole
/// spectrum, rank-deficiency is an error) or the Bessel bound alone.
inline FiberBounds frame_bounds(const Eigen::MatrixXcd& g, BoundsMode mode,
                                double rank_rel_tol = default_rank_rel_tol) {
  FiberBounds fb;
  fb.eigenvalues = hermitian_eigenvalues(g);
  const double top = std::max(fb.eigenvalues.front(), 0.0);
  const double cut = rank_rel_tol * top;
  for (double e : fb.eigenvalues) fb.rank += (top > 0 && e > cut) ? 1 : 0;
  fb.B = top;
  switch (mode) {
    case BoundsMode::frame:
      fb.A = fb.rank > 0 ? fb.eigenvalues[fb.rank - 1] : 0.0;
      break;
    case BoundsMode::riesz:
      if (fb.rank < fb.eigenvalues.size())
        throw DegenerateError("Gramian is rank deficient (rank " + std::to_string(fb.rank) + " of " +
                              std::to_string(fb.eigenvalues.size()) + "); system is not Riesz");
      fb.A = fb.eigenvalues.back();
      break;
    case BoundsMode::bessel:
      break;
  }
  return fb;
}

struct SigmaBounds {
  std::vector<double> sigma;
  FiberBounds bounds;
};

struct GramianReport {
  BoundsMode mode = BoundsMode::frame;
  double rank_rel_tol = default_rank_rel_tol;
  int gamma1_radius = 0;
  std::vector<SigmaBounds> per_sigma;
  std::optional<double> A;  // min over sigma with nonzero rank
  double B = 0.0;           // max over sigma
};

/// Per-sigma bounds and their essential extremes.
inline GramianReport essential_bounds(const TranslateSystem& sys, BoundsMode mode,
                                      double rank_rel_tol = default_rank_rel_tol) {
  const Layout& l = *sys.layout;
  GramianReport rep;
  rep.mode = mode;
  rep.rank_rel_tol = rank_rel_tol;
  rep.gamma1_radius = sys.gamma1_radius;
  rep.per_sigma.resize(l.n_sigma());
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    rep.per_sigma[s].sigma = l.sigma(s);
    try {
      rep.per_sigma[s].bounds = frame_bounds(gramian(l, fiber_system(s, sys)), mode, rank_rel_tol);
    } catch (const DegenerateError& e) {
      std::string at;
      for (double v : l.sigma(s)) at += (at.empty() ? "" : ",") + std::to_string(v);
      throw DegenerateError(std::string(e.what()) + " at sigma=(" + at + ")");
    }
  });
  bool any = false;
  for (const auto& ps : rep.per_sigma) {
    rep.B = std::max(rep.B, ps.bounds.B);
    if (mode != BoundsMode::bessel && ps.bounds.rank > 0) {
      rep.A = any ? std::min(*rep.A, *ps.bounds.A) : *ps.bounds.A;
      any = true;
    }
  }
  if (mode != BoundsMode::bessel && !any)
    throw DegenerateError("every fiber system is zero; the model is empty");
  return rep;
}

/// Orthonormal basis of J(sigma) = span of the fiber system.
struct RangeSample {
  std::size_t s = 0;
  std::vector<double> sigma;
  Eigen::MatrixXcd basis;  // flattened, orthonormal columns
  std::size_t rank() const { return static_cast<std::size_t>(basis.cols()); }
};

/// Gram-Schmidt with pivoting on the largest remaining residual (first index
/// on ties); columns whose residual drops below rank_rel_tol times the
/// largest input norm are discarded.
inline Eigen::MatrixXcd pivoted_gram_schmidt(Eigen::MatrixXcd v, double rank_rel_tol) {
  const Eigen::Index n = v.cols();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, v.col(i).norm());
  Eigen::MatrixXcd q(v.rows(), 0);
  if (scale == 0.0) return q;
  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index best = -1;
    double best_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double nr = v.col(i).norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = i;
      }
    }
    if (best < 0 || best_norm <= rank_rel_tol * scale) break;
    used[static_cast<std::size_t>(best)] = true;
    Vec b = v.col(best) / best_norm;
    // second pass against the accepted basis restores orthogonality lost to rounding
    b -= q * (q.adjoint() * b);
    b.normalize();
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = b;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!used[static_cast<std::size_t>(i)]) v.col(i) -= b * (b.adjoint() * v.col(i));
  }
  return q;
}

inline RangeSample range_sample(std::size_t s, const TranslateSystem& sys,
                                double rank_rel_tol = default_rank_rel_tol) {
  const Layout& l = *sys.layout;
  return {s, l.sigma(s), pivoted_gram_schmidt(as_columns(l, fiber_system(s, sys)), rank_rel_tol)};
}

/// P_sigma h.
inline FiberVector project(const Layout& layout, const RangeSample& rs, const FiberVector& h) {
  const Vec x = flatten(layout, h);
  return unflatten(layout, rs.basis * (rs.basis.adjoint() * x));
}

inline double residual_norm(const Layout& layout, const RangeSample& rs, const FiberVector& h) {
  const Vec x = flatten(layout, h);
  return (x - rs.basis * (rs.basis.adjoint() * x)).norm();
}

/// max_b ||(I - P_sigma) pi~_sigma(k) b|| over the basis of J(sigma).
inline double invariance_defect(const Layout& layout, const RangeSample& rs,
                                const std::vector<int>& k) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < rs.basis.cols(); ++c) {
    const auto b = unflatten(layout, rs.basis.col(c));
    worst = std::max(worst, residual_norm(layout, rs, fiber_action(layout, rs.s, k, b)));
  }
  return worst;
}

struct MembershipReport {
  std::vector<double> residual;  // per sigma
  double max = 0.0;
};

/// ||Tf(sigma) - P_sigma Tf(sigma)|| for every sigma.
inline MembershipReport membership_residual(const FiberField& f, const TranslateSystem& sys,
                                            double rank_rel_tol = default_rank_rel_tol) {
  require_same(*f.layout, *sys.layout, "membership_residual");
  const Layout& l = *sys.layout;
  MembershipReport rep;
  rep.residual.assign(l.n_sigma(), 0.0);
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    rep.residual[s] = residual_norm(l, range_sample(s, sys, rank_rel_tol), f.fibers[s]);
  });
  for (double r : rep.residual) rep.max = std::max(rep.max, r);
  return rep;
}

namespace detail {

inline Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  Eigen::VectorXd mu = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * mu.asDiagonal() * es.eigenvectors().adjoint();
}

inline double min_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Redefines a single generator fiber-by-fiber so that its fiber system is
/// orthonormal at every sigma with an active slot.
///
/// The Gramian depends on the fiber h only through rho_j = h_j h_j^*:
///   G[a][b] = cell * sum_j tr(U_{j,a}^* U_{j,b} rho_j),
/// which is linear in rho. We project the input's rho onto the affine set
/// {G = I}, and if that leaves the PSD cone we move towards the projection
/// of a multiple of the identity until every block is PSD again. The new
/// fiber is h_j = rho_j^{1/2}. Slots where the input vanishes stay zero.
inline TranslateSystem orthonormalize_fibers(const TranslateSystem& sys,
                                             double rank_rel_tol = default_rank_rel_tol) {
  if (sys.n_generators() != 1)
    throw InputError("orthonormalize_fibers: needs exactly one generator");
  const Layout& l = *sys.layout;
  const std::size_t nk = sys.gamma1.size();
  if (nk > 50) throw InputError("orthonormalize_fibers: |Gamma_1| > 50 is beyond desk scale");
  const auto m = static_cast<Eigen::Index>(l.space().dim());
  const Eigen::Index block = m * m;
  if (static_cast<std::size_t>(l.n_fiber()) * static_cast<std::size_t>(block) < nk)
    throw DegenerateError("orthonormalize_fibers: fiber dimension is smaller than |Gamma_1|");
  const double cell = l.space().cell();
  const FiberField& phi = sys.generators.front();

  FiberField out = FiberField::zeros(sys.layout);
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    std::vector<std::size_t> slots;
    for (std::size_t j = 0; j < l.n_fiber(); ++j)
      if (l.active(s, j) && phi.fibers[s].slots[j].norm() > 0) slots.push_back(j);
    if (slots.empty()) {
      if (l.any_active(s))
        throw DegenerateError("orthonormalize_fibers: generator vanishes at sigma index " +
                              std::to_string(s));
      return;
    }
    const auto ns = static_cast<Eigen::Index>(slots.size());
    if (ns * block < static_cast<Eigen::Index>(nk))
      throw DegenerateError("orthonormalize_fibers: active fiber dimension is smaller than |Gamma_1|");

    // U_{j,k} as dense matrices
    std::vector<std::vector<Operator>> u(slots.size());
    for (std::size_t a = 0; a < slots.size(); ++a)
      for (const auto& k : sys.gamma1)
        u[a].push_back(rep_matrix(l.group(), l.space(), l.lambda(s, slots[a]),
                                  lattice_element(l.group(), k)));

    // constraint rows: tr(C rho) = vec(C^T) . vec(rho)
    const auto neq = static_cast<Eigen::Index>(nk * nk);
    Eigen::MatrixXcd rows(neq, ns * block);
    Vec target = Vec::Zero(neq);
    for (std::size_t ka = 0; ka < nk; ++ka)
      for (std::size_t kb = 0; kb < nk; ++kb) {
        const auto row = static_cast<Eigen::Index>(ka * nk + kb);
        for (std::size_t a = 0; a < slots.size(); ++a) {
          const Operator c = cell * (u[a][ka].adjoint() * u[a][kb]).transpose();
          rows.block(row, static_cast<Eigen::Index>(a) * block, 1, block) = c.reshaped().transpose();
        }
        if (ka == kb) target(row) = 1.0;
      }
    const auto solver = rows.completeOrthogonalDecomposition();

    auto to_blocks = [&](const Vec& x) {
      std::vector<Eigen::MatrixXcd> rho;
      for (Eigen::Index a = 0; a < ns; ++a) {
        Eigen::MatrixXcd r = x.segment(a * block, block).reshaped(m, m);
        rho.push_back((r + r.adjoint()) / 2.0);
      }
      return rho;
    };
    auto to_vec = [&](const std::vector<Eigen::MatrixXcd>& rho) {
      Vec x(ns * block);
      for (Eigen::Index a = 0; a < ns; ++a) x.segment(a * block, block) = rho[static_cast<std::size_t>(a)].reshaped();
      return x;
    };
    auto project_affine = [&](const Vec& x) -> Vec {
      const Vec fixed = x + solver.solve(Vec(target - rows * x));
      if ((rows * fixed - target).norm() > 1e-9 * std::sqrt(static_cast<double>(nk)))
        throw DegenerateError("orthonormalize_fibers: no orthonormal fiber system exists at sigma index " +
                              std::to_string(s) + " (lattice operators are linearly dependent)");
      return fixed;
    };
    auto psd = [&](const std::vector<Eigen::MatrixXcd>& rho) {
      for (const auto& r : rho) {
        const double top = r.norm();
        if (detail::min_eigenvalue(r) < -1e-13 * top) return false;
      }
      return true;
    };

    std::vector<Eigen::MatrixXcd> rho_in;
    double diag = 0.0;
    for (std::size_t a = 0; a < slots.size(); ++a) {
      const Operator& h = phi.fibers[s].slots[slots[a]];
      rho_in.push_back(h * h.adjoint());
      diag += cell * rho_in.back().trace().real();
    }
    for (auto& r : rho_in) r /= diag;

    auto rho_p = to_blocks(project_affine(to_vec(rho_in)));
    if (!psd(rho_p)) {
      std::vector<Eigen::MatrixXcd> flat(slots.size());
      const double c = 1.0 / (cell * static_cast<double>(m) * static_cast<double>(ns));
      for (auto& r : flat) r = c * Eigen::MatrixXcd::Identity(m, m);
      const auto rho_i = to_blocks(project_affine(to_vec(flat)));
      if (!psd(rho_i))
        throw DegenerateError("orthonormalize_fibers: no positive solution found at sigma index " +
                              std::to_string(s));
      auto mix = [&](double t) {
        std::vector<Eigen::MatrixXcd> r(slots.size());
        for (std::size_t a = 0; a < r.size(); ++a) r[a] = (1 - t) * rho_p[a] + t * rho_i[a];
        return r;
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = (lo + hi) / 2;
        (psd(mix(mid)) ? hi : lo) = mid;
      }
      rho_p = mix(hi);
    }

    FiberVector h = FiberField::zero_fiber(l);
    for (std::size_t a = 0; a < slots.size(); ++a) h.slots[slots[a]] = detail::hermitian_sqrt(rho_p[a]);

    std::vector<FiberVector> vs;
    for (const auto& k : sys.gamma1) vs.push_back(fiber_action(l, s, k, h));
    const auto g = gramian(l, vs);
    const double dev = (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (dev > std::max(1e-10, rank_rel_tol))
      throw DegenerateError("orthonormalize_fibers: construction missed the identity by " +
                            std::to_string(dev) + " at sigma index " + std::to_string(s));
    out.fibers[s] = std::move(h);
  });

  TranslateSystem result = sys;
  result.generators = {std::move(out)};
  return result;
}

}  // namespace sis
