#pragma once

// The lattice acting on fibers. A lattice point gamma = (k, m) acts on
// T phi(sigma) by the central character e^{2 pi i <sigma, m>} times the fiber
// action (pi~_sigma(k) h)_j = pi_{sigma+j}(k) o h_j; this is T(L_gamma phi).

#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sis/error.hpp"
#include "sis/group.hpp"
#include "sis/parallel.hpp"
#include "sis/transform.hpp"

namespace sis {

/// Generators (already transformed: T phi) and the truncated lattice part
/// Gamma_1. The central part is all of Z_S^r.
struct TranslateSystem {
  LayoutPtr layout;
  std::vector<FiberField> generators;
  std::vector<std::vector<int>> gamma1;
  int gamma1_radius = 0;

  std::size_t n_generators() const { return generators.size(); }
  std::size_t n_fiber_vectors() const { return generators.size() * gamma1.size(); }
};

inline TranslateSystem make_system(std::vector<FiberField> generators, int gamma1_radius) {
  if (generators.empty()) throw InputError("translate system needs at least one generator");
  const LayoutPtr layout = generators.front().layout;
  for (const auto& g : generators) require_same(*layout, *g.layout, "make_system");
  return {layout, std::move(generators), lattice_gamma1(layout->group(), gamma1_radius),
          gamma1_radius};
}

/// e^{2 pi i <sigma, m>}
inline cplx central_character(const std::vector<double>& sigma, const std::vector<int>& m) {
  if (sigma.size() != m.size()) throw InputError("central_character: length mismatch");
  // sigma = s / S exactly on the grid; accumulate in cycles
  double cycles = 0.0;
  for (std::size_t a = 0; a < sigma.size(); ++a) cycles += sigma[a] * m[a];
  return cis(cycles);
}

inline GroupElement lattice_element(const GroupSpec& spec, const std::vector<int>& k) {
  if (k.size() != static_cast<std::size_t>(2 * spec.d))
    throw InputError("lattice point k must have 2d=" + std::to_string(2 * spec.d) + " components");
  GroupElement g = identity(spec);
  g.x.assign(k.begin(), k.end());
  return g;
}

/// (pi~_sigma(k) h)_j = pi_{sigma+j}((k, 0)) o h_j; masked slots stay zero.
inline FiberVector fiber_action(const Layout& layout, std::size_t s, const std::vector<int>& k,
                                const FiberVector& h) {
  if (h.slots.size() != layout.n_fiber()) throw LayoutError("fiber_action: fiber length mismatch");
  const auto g = lattice_element(layout.group(), k);
  FiberVector out;
  out.slots.reserve(h.slots.size());
  const auto n = static_cast<Eigen::Index>(layout.space().dim());
  for (std::size_t j = 0; j < h.slots.size(); ++j) {
    require_shape(layout.space(), h.slots[j], "fiber_action");
    if (!layout.active(s, j)) {
      out.slots.push_back(Operator::Zero(n, n));
      continue;
    }
    out.slots.push_back(
        rep_action(layout.group(), layout.space(), layout.lambda(s, j), g).apply(h.slots[j]));
  }
  return out;
}

/// T(L_gamma phi) from T phi.
inline FiberField translate(const FiberField& ff, const LatticePoint& gamma) {
  const Layout& l = *ff.layout;
  if (gamma.m.size() != static_cast<std::size_t>(l.r()))
    throw InputError("translate: m must have r components");
  FiberField out{ff.layout, std::vector<FiberVector>(l.n_sigma())};
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    out.fibers[s] = fiber_action(l, s, gamma.k, ff.fibers[s]);
    const cplx chi = central_character(l.sigma(s), gamma.m);
    for (auto& op : out.fibers[s].slots) op *= chi;
  });
  return out;
}

/// <f, L_gamma phi> = S^{-r} sum_sigma e^{-2 pi i <sigma,m>} <Tf(sigma), pi~_sigma(k) T phi(sigma)>.
inline cplx analysis_coefficient(const FiberField& f, const FiberField& phi,
                                 const LatticePoint& gamma) {
  require_same(*f.layout, *phi.layout, "analysis_coefficient");
  const Layout& l = *f.layout;
  cplx acc{0.0, 0.0};
  for (std::size_t s = 0; s < l.n_sigma(); ++s) {
    const auto moved = fiber_action(l, s, gamma.k, phi.fibers[s]);
    acc += std::conj(central_character(l.sigma(s), gamma.m)) * fiber_inner(l, f.fibers[s], moved);
  }
  return acc / static_cast<double>(l.n_sigma());
}

/// All m in Z_S^r, lexicographic.
inline std::vector<std::vector<int>> central_lattice(const Layout& layout) {
  std::vector<std::vector<int>> out;
  out.reserve(layout.n_sigma());
  for (std::size_t i = 0; i < layout.n_sigma(); ++i) out.push_back(layout.torus().index(i));
  return out;
}

enum class SumMethod { direct, fiber };

/// sum_{phi, k, m} |<f, L_(k,m) phi>|^2, either from the analysis
/// coefficients themselves (direct) or from the fiber inner products.
inline double frame_sum(const FiberField& f, const TranslateSystem& sys, SumMethod method) {
  require_same(*f.layout, *sys.layout, "frame_sum");
  const Layout& l = *sys.layout;
  if (method == SumMethod::direct) {
    const auto ms = central_lattice(l);
    const std::size_t nk = sys.gamma1.size();
    std::vector<double> part(sys.n_generators() * nk, 0.0);
    parallel_for(part.size(), [&](std::size_t idx) {
      const auto& phi = sys.generators[idx / nk];
      const auto& k = sys.gamma1[idx % nk];
      double acc = 0.0;
      for (const auto& m : ms) acc += std::norm(analysis_coefficient(f, phi, {k, m}));
      part[idx] = acc;
    });
    double total = 0.0;
    for (double p : part) total += p;
    return total;
  }
  std::vector<double> part(l.n_sigma(), 0.0);
  parallel_for(l.n_sigma(), [&](std::size_t s) {
    double acc = 0.0;
    for (const auto& phi : sys.generators)
      for (const auto& k : sys.gamma1)
        acc += std::norm(fiber_inner(l, f.fibers[s], fiber_action(l, s, k, phi.fibers[s])));
    part[s] = acc;
  });
  double total = 0.0;
  for (double p : part) total += p;
  return total / static_cast<double>(l.n_sigma());
}

/// Index of a coefficient a_{phi, k, m}.
struct CoeffKey {
  std::size_t phi = 0;
  std::vector<int> k;
  std::vector<int> m;

  friend bool operator<(const CoeffKey& a, const CoeffKey& b) {
    return std::tie(a.phi, a.k, a.m) < std::tie(b.phi, b.k, b.m);
  }
  friend bool operator==(const CoeffKey&, const CoeffKey&) = default;
};

/// Finitely supported coefficients, iterated in key order.
using Coefficients = std::map<CoeffKey, cplx>;

inline void check_key(const TranslateSystem& sys, const CoeffKey& key) {
  const Layout& l = *sys.layout;
  bool ok = key.phi < sys.n_generators() && key.m.size() == static_cast<std::size_t>(l.r());
  for (int v : key.m) ok = ok && v >= 0 && v < l.S();
  bool known_k = false;
  for (const auto& k : sys.gamma1) known_k = known_k || k == key.k;
  if (!ok || !known_k) throw InputError("coefficient key does not index into the translate system");
}

/// T(sum a_{phi,k,m} L_{(k,m)} phi).
inline FiberField synthesis(const Coefficients& coeffs, const TranslateSystem& sys) {
  FiberField out = FiberField::zeros(sys.layout);
  for (const auto& [key, a] : coeffs) {
    check_key(sys, key);
    axpy(a, translate(sys.generators[key.phi], {key.k, key.m}), out);
  }
  return out;
}

/// P(sigma) = sum_m a_m e^{2 pi i <sigma, m>}, evaluated by direct summation.
inline cplx trig_poly(const std::vector<std::pair<std::vector<int>, cplx>>& terms,
                      const std::vector<double>& sigma) {
  cplx acc{0.0, 0.0};
  for (const auto& [m, a] : terms) acc += a * central_character(sigma, m);
  return acc;
}

}  // namespace sis
