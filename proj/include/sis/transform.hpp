#pragma once

// Fourier-side fields lambda -> F(lambda) on the grid lambda = sigma + j,
// sigma in (Z/S)^r / S and j in a finite box, together with the Pfaffian
// weighting M, the periodization A and their composite T = A o M.
//
// Discrete model: the window of the sample grid equals S, so lambda * W is
// an integer for every lambda on the grid and all lattice operators are
// exactly periodic. The central lattice is Z_S^r, paired with sigma by
// e^{2 pi i <sigma, m>}.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/group.hpp"
#include "sis/space.hpp"

namespace sis {

/// Points sigma_s = s / S, s in {0..S-1}^r, lexicographic.
struct TorusGrid {
  int r = 1;
  int S = 2;

  std::size_t size() const {
    std::size_t n = 1;
    for (int i = 0; i < r; ++i) n *= static_cast<std::size_t>(S);
    return n;
  }
  std::vector<int> index(std::size_t flat) const {
    std::vector<int> s(static_cast<std::size_t>(r));
    for (int a = r - 1; a >= 0; --a) {
      s[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(S));
      flat /= static_cast<std::size_t>(S);
    }
    return s;
  }
  std::vector<double> point(std::size_t flat) const {
    auto s = index(flat);
    std::vector<double> sigma(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) sigma[a] = static_cast<double>(s[a]) / S;
    return sigma;
  }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;
};

/// Box of fiber indices prod [j_min_i, j_max_i], lexicographic.
struct FiberIndexSet {
  std::vector<int> j_min;
  std::vector<int> j_max;

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t a = 0; a < j_min.size(); ++a)
      n *= static_cast<std::size_t>(j_max[a] - j_min[a] + 1);
    return n;
  }
  std::vector<int> index(std::size_t flat) const {
    std::vector<int> j(j_min.size());
    for (std::size_t a = j_min.size(); a-- > 0;) {
      const auto width = static_cast<std::size_t>(j_max[a] - j_min[a] + 1);
      j[a] = j_min[a] + static_cast<int>(flat % width);
      flat /= width;
    }
    return j;
  }

  static FiberIndexSet symmetric(int r, int half) {
    return {std::vector<int>(static_cast<std::size_t>(r), -half),
            std::vector<int>(static_cast<std::size_t>(r), half)};
  }

  friend bool operator==(const FiberIndexSet&, const FiberIndexSet&) = default;
};

/// Default Pfaffian mask threshold.
inline constexpr double default_pf_eps = 1e-9;

/// Everything two fields must share to be combined: group, torus grid,
/// fiber box, sample grid and mask.
class Layout {
 public:
  Layout(GroupSpec group, int S, FiberIndexSet box, int q, double pf_eps = default_pf_eps)
      : group_(group),
        torus_{group.r, S},
        box_(std::move(box)),
        space_(group.d, S, q),
        pf_eps_(pf_eps) {
    if (S < 2) throw InputError("torus grid needs S >= 2");
    if (box_.j_min.size() != static_cast<std::size_t>(group.r) ||
        box_.j_max.size() != static_cast<std::size_t>(group.r))
      throw InputError("fiber box must have r=" + std::to_string(group.r) + " components");
    for (std::size_t a = 0; a < box_.j_min.size(); ++a)
      if (box_.j_min[a] > box_.j_max[a]) throw InputError("fiber box is empty");
    if (!(pf_eps > 0)) throw InputError("pf_eps must be positive");

    const std::size_t ns = torus_.size(), nj = box_.size();
    pf_.resize(ns * nj);
    mask_.resize(ns * nj);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t j = 0; j < nj; ++j) {
        const double pf = pfaffian(group_, lambda(s, j));
        pf_[s * nj + j] = pf;
        mask_[s * nj + j] = pf >= pf_eps_ ? 1 : 0;
      }
  }

  const GroupSpec& group() const { return group_; }
  const TorusGrid& torus() const { return torus_; }
  const FiberIndexSet& box() const { return box_; }
  const GridSpace& space() const { return space_; }
  double pf_eps() const { return pf_eps_; }
  int S() const { return torus_.S; }
  int r() const { return torus_.r; }

  std::size_t n_sigma() const { return torus_.size(); }
  std::size_t n_fiber() const { return box_.size(); }
  std::size_t n_slots() const { return n_sigma() * n_fiber(); }

  std::vector<double> sigma(std::size_t s) const { return torus_.point(s); }
  std::vector<int> j(std::size_t j) const { return box_.index(j); }
  std::vector<double> lambda(std::size_t s, std::size_t j) const {
    auto l = torus_.point(s);
    const auto jj = box_.index(j);
    for (std::size_t a = 0; a < l.size(); ++a) l[a] += jj[a];
    return l;
  }
  double pf(std::size_t s, std::size_t j) const { return pf_[s * n_fiber() + j]; }
  /// true where |Pf(sigma + j)| >= pf_eps.
  bool active(std::size_t s, std::size_t j) const { return mask_[s * n_fiber() + j] != 0; }
  bool any_active(std::size_t s) const {
    for (std::size_t j = 0; j < n_fiber(); ++j)
      if (active(s, j)) return true;
    return false;
  }
  std::size_t active_count() const {
    std::size_t n = 0;
    for (char m : mask_) n += m != 0;
    return n;
  }
  const std::vector<char>& mask() const { return mask_; }

  /// Real length of one fiber vector, in complex entries.
  std::size_t fiber_dim() const { return n_fiber() * space_.dim() * space_.dim(); }

  bool same_as(const Layout& o) const {
    return group_ == o.group_ && torus_ == o.torus_ && box_ == o.box_ && space_ == o.space_ &&
           mask_ == o.mask_;
  }

 private:
  GroupSpec group_;
  TorusGrid torus_;
  FiberIndexSet box_;
  GridSpace space_;
  double pf_eps_;
  std::vector<double> pf_;
  std::vector<char> mask_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

inline LayoutPtr make_layout(GroupSpec group, int S, FiberIndexSet box, int q,
                             double pf_eps = default_pf_eps) {
  return std::make_shared<const Layout>(group, S, std::move(box), q, pf_eps);
}

inline void require_same(const Layout& a, const Layout& b, const char* what) {
  if (&a != &b && !a.same_as(b)) throw LayoutError(std::string(what) + ": layout mismatch");
}

/// Which measure on the lambda grid a field is square-integrable against:
/// the Plancherel measure |Pf(lambda)| dlambda for raw Fourier-side inputs,
/// or plain dlambda after the weighting M.
enum class Measure { plancherel, lebesgue };

/// lambda -> F(lambda) stored slot-wise, sigma-major then j, both lexicographic.
struct OperatorField {
  LayoutPtr layout;
  Measure measure = Measure::plancherel;
  std::vector<Operator> data;

  static OperatorField zeros(LayoutPtr layout, Measure measure = Measure::plancherel) {
    OperatorField f{layout, measure, {}};
    const auto n = static_cast<Eigen::Index>(layout->space().dim());
    f.data.assign(layout->n_slots(), Operator::Zero(n, n));
    return f;
  }
  Operator& at(std::size_t s, std::size_t j) { return data[s * layout->n_fiber() + j]; }
  const Operator& at(std::size_t s, std::size_t j) const {
    return data[s * layout->n_fiber() + j];
  }
};

/// An element of L = l^2(box, HS): one operator per fiber index.
struct FiberVector {
  std::vector<Operator> slots;
};

/// sigma -> FiberVector.
struct FiberField {
  LayoutPtr layout;
  std::vector<FiberVector> fibers;

  static FiberField zeros(LayoutPtr layout) {
    FiberField f{layout, {}};
    f.fibers.assign(layout->n_sigma(), zero_fiber(*layout));
    return f;
  }
  static FiberVector zero_fiber(const Layout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.space().dim());
    return FiberVector{std::vector<Operator>(layout.n_fiber(), Operator::Zero(n, n))};
  }
};

inline cplx fiber_inner(const Layout& layout, const FiberVector& a, const FiberVector& b) {
  if (a.slots.size() != layout.n_fiber() || b.slots.size() != layout.n_fiber())
    throw LayoutError("fiber_inner: fiber length mismatch");
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < a.slots.size(); ++j)
    acc += hs_inner(layout.space(), a.slots[j], b.slots[j]);
  return acc;
}

inline double fiber_norm_sq(const Layout& layout, const FiberVector& a) {
  return fiber_inner(layout, a, a).real();
}

/// ||a||^2 = S^{-r} sum_sigma ||a(sigma)||_L^2.
inline double fiber_norm_sq(const FiberField& f) {
  double acc = 0.0;
  for (const auto& v : f.fibers) acc += fiber_norm_sq(*f.layout, v);
  return acc / static_cast<double>(f.layout->n_sigma());
}
inline double fiber_norm(const FiberField& f) { return std::sqrt(fiber_norm_sq(f)); }

/// L^2(T^r, L) inner product.
inline cplx field_inner(const FiberField& a, const FiberField& b) {
  require_same(*a.layout, *b.layout, "field_inner");
  cplx acc{0.0, 0.0};
  for (std::size_t s = 0; s < a.fibers.size(); ++s)
    acc += fiber_inner(*a.layout, a.fibers[s], b.fibers[s]);
  return acc / static_cast<double>(a.layout->n_sigma());
}

/// Squared norm of F in the measure it carries:
/// S^{-r} sum_{sigma, j active} ||F||_HS^2 (* |Pf| for plancherel fields).
inline double field_norm_sq(const OperatorField& f) {
  const Layout& l = *f.layout;
  double acc = 0.0;
  for (std::size_t s = 0; s < l.n_sigma(); ++s)
    for (std::size_t j = 0; j < l.n_fiber(); ++j) {
      if (!l.active(s, j)) continue;
      const double h = hs_norm(l.space(), f.at(s, j));
      acc += f.measure == Measure::plancherel ? h * h * l.pf(s, j) : h * h;
    }
  return acc / static_cast<double>(l.n_sigma());
}
inline double field_norm(const OperatorField& f) { return std::sqrt(field_norm_sq(f)); }

/// M: F(lambda) -> |Pf(lambda)|^{1/2} F(lambda). Masked slots are zeroed.
inline OperatorField weight(const OperatorField& f) {
  if (f.measure != Measure::plancherel)
    throw InputError("weight: field is already weighted");
  OperatorField out = f;
  out.measure = Measure::lebesgue;
  const Layout& l = *f.layout;
  const auto n = static_cast<Eigen::Index>(l.space().dim());
  for (std::size_t s = 0; s < l.n_sigma(); ++s)
    for (std::size_t j = 0; j < l.n_fiber(); ++j) {
      if (l.active(s, j))
        out.at(s, j) *= std::sqrt(l.pf(s, j));
      else
        out.at(s, j) = Operator::Zero(n, n);
    }
  return out;
}

/// A: regroups the (sigma, j) array into per-sigma sequences. Exact.
inline FiberField periodize(const OperatorField& f) {
  if (f.measure != Measure::lebesgue)
    throw InputError("periodize: expects a weighted (Lebesgue-measure) field");
  const Layout& l = *f.layout;
  FiberField out{f.layout, std::vector<FiberVector>(l.n_sigma())};
  for (std::size_t s = 0; s < l.n_sigma(); ++s) {
    out.fibers[s].slots.reserve(l.n_fiber());
    for (std::size_t j = 0; j < l.n_fiber(); ++j) out.fibers[s].slots.push_back(f.at(s, j));
  }
  return out;
}

inline OperatorField deperiodize(const FiberField& ff, const LayoutPtr& layout) {
  require_same(*ff.layout, *layout, "deperiodize");
  const Layout& l = *layout;
  if (ff.fibers.size() != l.n_sigma()) throw LayoutError("deperiodize: wrong number of fibers");
  OperatorField out{layout, Measure::lebesgue, {}};
  out.data.reserve(l.n_slots());
  for (std::size_t s = 0; s < l.n_sigma(); ++s) {
    if (ff.fibers[s].slots.size() != l.n_fiber())
      throw LayoutError("deperiodize: fiber length mismatch");
    for (const auto& op : ff.fibers[s].slots) out.data.push_back(op);
  }
  return out;
}

/// T = A o M; the Fourier transform is absorbed into the input.
inline FiberField t_transform(const OperatorField& f) { return periodize(weight(f)); }

/// Flattens a fiber vector so that the Euclidean inner product of two
/// flattened vectors equals fiber_inner.
inline Vec flatten(const Layout& layout, const FiberVector& v) {
  const std::size_t block = layout.space().dim() * layout.space().dim();
  const double scale = std::sqrt(layout.space().cell());
  Vec out(static_cast<Eigen::Index>(layout.n_fiber() * block));
  for (std::size_t j = 0; j < v.slots.size(); ++j)
    out.segment(static_cast<Eigen::Index>(j * block), static_cast<Eigen::Index>(block)) =
        scale * v.slots[j].reshaped();
  return out;
}

inline FiberVector unflatten(const Layout& layout, const Vec& x) {
  const auto n = static_cast<Eigen::Index>(layout.space().dim());
  const std::size_t block = layout.space().dim() * layout.space().dim();
  const double scale = 1.0 / std::sqrt(layout.space().cell());
  FiberVector v;
  v.slots.reserve(layout.n_fiber());
  for (std::size_t j = 0; j < layout.n_fiber(); ++j) {
    Vec seg = x.segment(static_cast<Eigen::Index>(j * block), static_cast<Eigen::Index>(block));
    v.slots.push_back(scale * seg.reshaped(n, n));
  }
  return v;
}

inline FiberVector& axpy(const cplx& a, const FiberVector& x, FiberVector& y) {
  for (std::size_t j = 0; j < y.slots.size(); ++j) y.slots[j] += a * x.slots[j];
  return y;
}

inline FiberField& axpy(const cplx& a, const FiberField& x, FiberField& y) {
  require_same(*x.layout, *y.layout, "axpy");
  for (std::size_t s = 0; s < y.fibers.size(); ++s) axpy(a, x.fibers[s], y.fibers[s]);
  return y;
}

}  // namespace sis
