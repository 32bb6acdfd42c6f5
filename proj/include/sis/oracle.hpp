#pragma once

// Brute-force verifiers. Nothing here uses fiber Gramians, range samples or
// per-sigma bounds: every quantity is rebuilt from translates, analysis
// coefficients and representation matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sis/action.hpp"
#include "sis/error.hpp"
#include "sis/group.hpp"
#include "sis/parallel.hpp"
#include "sis/transform.hpp"

namespace sis {

inline constexpr std::size_t translate_gram_limit = 4096;

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// (phi, k, m) in the order used by translate_gram: phi-major, then k, then m.
inline std::vector<CoeffKey> translate_index(const TranslateSystem& sys) {
  std::vector<CoeffKey> keys;
  const auto ms = central_lattice(*sys.layout);
  for (std::size_t p = 0; p < sys.n_generators(); ++p)
    for (const auto& k : sys.gamma1)
      for (const auto& m : ms) keys.push_back({p, k, m});
  return keys;
}

/// Gram matrix of the translates L_gamma phi in L^2(T^r, L):
/// G[i][j] = <L_{gamma_j} phi_j, L_{gamma_i} phi_i>.
inline Eigen::MatrixXcd translate_gram(const TranslateSystem& sys) {
  const auto keys = translate_index(sys);
  if (keys.size() > translate_gram_limit)
    throw InputError("translate_gram: " + std::to_string(keys.size()) +
                     " translates exceed the desk-scale limit of " +
                     std::to_string(translate_gram_limit));
  const Layout& l = *sys.layout;
  const auto fd = static_cast<Eigen::Index>(l.fiber_dim());
  const auto ns = static_cast<Eigen::Index>(l.n_sigma());
  Eigen::MatrixXcd v(fd * ns, static_cast<Eigen::Index>(keys.size()));
  const double w = 1.0 / std::sqrt(static_cast<double>(ns));
  parallel_for(keys.size(), [&](std::size_t i) {
    const auto moved = translate(sys.generators[keys[i].phi], {keys[i].k, keys[i].m});
    for (Eigen::Index s = 0; s < ns; ++s)
      v.block(s * fd, static_cast<Eigen::Index>(i), fd, 1) =
          w * flatten(l, moved.fibers[static_cast<std::size_t>(s)]);
  });
  Eigen::MatrixXcd g = v.adjoint() * v;
  return (g + g.adjoint()) / 2.0;
}

struct EqualityLemmaResult {
  double lhs = 0.0;  // ||sum a L_gamma phi||^2 from the synthesized field
  double rhs = 0.0;  // S^{-r} sum_sigma ||sum_{phi,k} P_{phi,k}(sigma) pi~_sigma(k) T phi(sigma)||^2
  double rel_err = 0.0;
  double coeff_energy = 0.0;  // sum |a|^2
  double poly_energy = 0.0;   // S^{-r} sum_{phi,k,sigma} |P_{phi,k}(sigma)|^2
  double parseval_rel_err = 0.0;
};

inline EqualityLemmaResult equality_lemma_check(const Coefficients& coeffs,
                                                const TranslateSystem& sys) {
  const Layout& l = *sys.layout;
  EqualityLemmaResult res;
  res.lhs = fiber_norm_sq(synthesis(coeffs, sys));

  // group the coefficients by (phi, k)
  std::vector<std::pair<std::pair<std::size_t, std::vector<int>>,
                        std::vector<std::pair<std::vector<int>, cplx>>>>
      polys;
  for (const auto& [key, a] : coeffs) {
    check_key(sys, key);
    res.coeff_energy += std::norm(a);
    if (polys.empty() || polys.back().first != std::make_pair(key.phi, key.k))
      polys.push_back({{key.phi, key.k}, {}});
    polys.back().second.emplace_back(key.m, a);
  }

  std::vector<double> fiber_part(l.n_sigma(), 0.0), poly_part(l.n_sigma(), 0.0);
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    const auto sigma = l.sigma(s);
    FiberVector acc = FiberField::zero_fiber(l);
    double pe = 0.0;
    for (const auto& [pk, terms] : polys) {
      const cplx p = trig_poly(terms, sigma);
      pe += std::norm(p);
      axpy(p, fiber_action(l, s, pk.second, sys.generators[pk.first].fibers[s]), acc);
    }
    fiber_part[s] = fiber_norm_sq(l, acc);
    poly_part[s] = pe;
  });
  for (std::size_t s = 0; s < l.n_sigma(); ++s) {
    res.rhs += fiber_part[s];
    res.poly_energy += poly_part[s];
  }
  res.rhs /= static_cast<double>(l.n_sigma());
  res.poly_energy /= static_cast<double>(l.n_sigma());
  res.rel_err = rel_err(res.lhs, res.rhs);
  res.parseval_rel_err = rel_err(res.coeff_energy, res.poly_energy);
  return res;
}

struct SumIdResult {
  double direct = 0.0;
  double fiber = 0.0;
  double rel_err = 0.0;
};

/// Both sides of the coefficient-sum identity. The direct side recomputes
/// every analysis coefficient from translates of the generators.
inline SumIdResult sumid_check(const FiberField& f, const TranslateSystem& sys) {
  require_same(*f.layout, *sys.layout, "sumid_check");
  SumIdResult r;
  const auto keys = translate_index(sys);
  std::vector<double> parts(keys.size(), 0.0);
  parallel_for(keys.size(), [&](std::size_t i) {
    const auto moved = translate(sys.generators[keys[i].phi], {keys[i].k, keys[i].m});
    parts[i] = std::norm(field_inner(f, moved));
  });
  for (double p : parts) r.direct += p;
  r.fiber = frame_sum(f, sys, SumMethod::fiber);
  r.rel_err = rel_err(r.direct, r.fiber);
  return r;
}

struct HomomorphismResult {
  double defect = 0.0;  // ||pi(a) pi(b) - c pi(ab)||_max
  cplx scalar{1.0, 0.0};
};

inline HomomorphismResult homomorphism_check(const GroupSpec& spec, const GridSpace& space,
                                             const std::vector<double>& lambda,
                                             const GroupElement& a, const GroupElement& b) {
  if (!spec.has_group_law())
    throw UnsupportedError("homomorphism_check: no group law for " + spec.name());
  const Operator lhs = rep_matrix(spec, space, lambda, a) * rep_matrix(spec, space, lambda, b);
  const Operator rhs = rep_matrix(spec, space, lambda, multiply(spec, a, b));
  HomomorphismResult res;
  for (Eigen::Index k = 0; k < rhs.cols(); ++k) {
    Eigen::Index i = 0;
    if (rhs.col(k).cwiseAbs().maxCoeff(&i) > 0.5) {
      res.scalar = lhs(i, k) / rhs(i, k);
      break;
    }
  }
  res.defect = (lhs - res.scalar * rhs).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace sis
