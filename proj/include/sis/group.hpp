#pragma once

// Group presets: the abelian groups R^r, the Heisenberg group, a six
// dimensional two-step group and a five dimensional three-step group, with
// their Plancherel densities and Schroedinger-type representations realized
// on the periodic sample grid.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sis/error.hpp"
#include "sis/space.hpp"

namespace sis {

enum class GroupKind { abelian, heisenberg3, twostep6, threestep5 };

struct GroupSpec {
  GroupKind kind = GroupKind::heisenberg3;
  int r = 1;  // center dimension
  int d = 1;  // half orbit dimension, n = r + 2d

  bool has_group_law() const { return kind != GroupKind::threestep5; }
  int dim() const { return r + 2 * d; }

  std::string name() const {
    switch (kind) {
      case GroupKind::abelian: return "abelian(" + std::to_string(r) + ")";
      case GroupKind::heisenberg3: return "heisenberg3";
      case GroupKind::twostep6: return "twostep6";
      case GroupKind::threestep5: return "threestep5";
    }
    return "?";
  }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// Coordinates of a group element. x holds the 2d coordinates of the
/// complement of the center, translations first then modulations:
///   heisenberg3: (x, y)     twostep6, threestep5: (x1, x2, y1, y2).
/// z holds the r central coordinates.
struct GroupElement {
  std::vector<double> x;
  std::vector<double> z;
};

/// gamma = (k, m), k in the integer lattice of the complement, m central.
struct LatticePoint {
  std::vector<int> k;
  std::vector<int> m;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline GroupSpec abelian(int r) {
  if (r < 1) throw InputError("abelian preset needs r >= 1");
  return {GroupKind::abelian, r, 0};
}

/// Accepts "heisenberg3", "twostep6", "threestep5", "abelian(r)" or "abelian".
inline GroupSpec preset(const std::string& name, int abelian_r = 1) {
  if (name == "heisenberg3") return {GroupKind::heisenberg3, 1, 1};
  if (name == "twostep6") return {GroupKind::twostep6, 2, 2};
  if (name == "threestep5") return {GroupKind::threestep5, 1, 2};
  if (name == "abelian") return abelian(abelian_r);
  if (name.rfind("abelian(", 0) == 0 && name.back() == ')') {
    const auto inner = name.substr(8, name.size() - 9);
    std::size_t used = 0;
    int r = 0;
    try {
      r = std::stoi(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == inner.size() && !inner.empty()) return abelian(r);
  }
  throw InputError("unknown group preset '" + name + "'");
}

inline GroupElement identity(const GroupSpec& spec) {
  return {std::vector<double>(static_cast<std::size_t>(2 * spec.d), 0.0),
          std::vector<double>(static_cast<std::size_t>(spec.r), 0.0)};
}

inline GroupElement to_element(const LatticePoint& p) {
  GroupElement g;
  g.x.assign(p.k.begin(), p.k.end());
  g.z.assign(p.m.begin(), p.m.end());
  return g;
}

inline void require_lengths(const GroupSpec& spec, const GroupElement& g) {
  if (g.x.size() != static_cast<std::size_t>(2 * spec.d) ||
      g.z.size() != static_cast<std::size_t>(spec.r))
    throw InputError("group element has wrong coordinate lengths for " + spec.name());
}

namespace detail {

// 7x7 matrix realization of twostep6. The central entries are read so that
// row 0 carries z1 and row 1 carries z2, which agrees with the brackets
// [X1,Y1] = [X2,Y2] = Z1, [X1,Y2] = [X2,Y1] = Z2 and with the representation.
inline Eigen::Matrix<double, 7, 7> twostep_matrix(const GroupElement& g) {
  const double x1 = g.x[0], x2 = g.x[1], y1 = g.x[2], y2 = g.x[3];
  const double z1 = g.z[0], z2 = g.z[1];
  Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Identity();
  m(0, 2) = x2;  m(0, 3) = x1;  m(0, 4) = -y2; m(0, 5) = -y1;
  m(1, 2) = x1;  m(1, 3) = x2;  m(1, 4) = -y1; m(1, 5) = -y2;
  m(0, 6) = 2 * z1 - x1 * y1 - x2 * y2;
  m(1, 6) = 2 * z2 - x1 * y2 - x2 * y1;
  m(2, 6) = y2;
  m(3, 6) = y1;
  m(4, 6) = x2;
  m(5, 6) = x1;
  return m;
}

inline GroupElement twostep_coords(const Eigen::Matrix<double, 7, 7>& m) {
  const double x1 = m(5, 6), x2 = m(4, 6), y1 = m(3, 6), y2 = m(2, 6);
  const double z1 = (m(0, 6) + x1 * y1 + x2 * y2) / 2;
  const double z2 = (m(1, 6) + x1 * y2 + x2 * y1) / 2;
  return {{x1, x2, y1, y2}, {z1, z2}};
}

}  // namespace detail

/// Group product. Not available for threestep5, whose group law is not
/// given in closed form.
inline GroupElement multiply(const GroupSpec& spec, const GroupElement& a, const GroupElement& b) {
  if (!spec.has_group_law())
    throw UnsupportedError("multiply: no group law available for " + spec.name());
  require_lengths(spec, a);
  require_lengths(spec, b);
  switch (spec.kind) {
    case GroupKind::abelian: {
      GroupElement c = a;
      for (std::size_t i = 0; i < c.z.size(); ++i) c.z[i] += b.z[i];
      return c;
    }
    case GroupKind::heisenberg3:
      // (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')
      return {{a.x[0] + b.x[0], a.x[1] + b.x[1]}, {a.z[0] + b.z[0] + a.x[0] * b.x[1]}};
    case GroupKind::twostep6:
      return detail::twostep_coords(detail::twostep_matrix(a) * detail::twostep_matrix(b));
    case GroupKind::threestep5:
      break;
  }
  throw UnsupportedError("multiply: unreachable preset");
}

inline GroupElement inverse(const GroupSpec& spec, const GroupElement& a) {
  if (!spec.has_group_law())
    throw UnsupportedError("inverse: no group law available for " + spec.name());
  require_lengths(spec, a);
  switch (spec.kind) {
    case GroupKind::abelian: {
      GroupElement c = a;
      for (auto& v : c.z) v = -v;
      return c;
    }
    case GroupKind::heisenberg3:
      return {{-a.x[0], -a.x[1]}, {-a.z[0] + a.x[0] * a.x[1]}};
    case GroupKind::twostep6:
      return detail::twostep_coords(detail::twostep_matrix(a).inverse());
    case GroupKind::threestep5:
      break;
  }
  throw UnsupportedError("inverse: unreachable preset");
}

/// |Pf(lambda)|, the Plancherel density.
inline double pfaffian(const GroupSpec& spec, const std::vector<double>& lambda) {
  if (lambda.size() != static_cast<std::size_t>(spec.r))
    throw InputError("pfaffian: lambda must have length r=" + std::to_string(spec.r));
  switch (spec.kind) {
    case GroupKind::abelian: return 1.0;
    case GroupKind::heisenberg3: return std::abs(lambda[0]);
    case GroupKind::twostep6: return std::abs(lambda[0] * lambda[0] - lambda[1] * lambda[1]);
    case GroupKind::threestep5: return lambda[0] * lambda[0];
  }
  return 0.0;
}

/// All k in Z^{2d} with max-norm <= radius, lexicographic order.
inline std::vector<std::vector<int>> lattice_gamma1(const GroupSpec& spec, int radius) {
  if (radius < 0) throw InputError("lattice_gamma1: radius must be >= 0");
  const auto len = static_cast<std::size_t>(2 * spec.d);
  std::vector<std::vector<int>> out;
  std::vector<int> k(len, -radius);
  while (true) {
    out.push_back(k);
    std::size_t a = len;
    while (a > 0) {
      --a;
      if (k[a] < radius) {
        ++k[a];
        break;
      }
      k[a] = -radius;
      if (a == 0) return out;
    }
    if (len == 0) return out;
  }
}

/// e^{2 pi i cycles}, with the integer part removed first.
inline cplx cis(double cycles) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, two_pi * frac);
}

/// pi_lambda(g) on the grid as (U f)[i] = scale * phase[i] * f[src[i]].
struct RepAction {
  cplx scale{1.0, 0.0};
  std::vector<cplx> phase;
  std::vector<std::size_t> src;

  Operator matrix() const {
    const auto n = static_cast<Eigen::Index>(src.size());
    Operator u = Operator::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      u(i, static_cast<Eigen::Index>(src[static_cast<std::size_t>(i)])) =
          scale * phase[static_cast<std::size_t>(i)];
    return u;
  }

  /// U * h, acting on the left (column) factor of an operator.
  Operator apply(const Operator& h) const {
    Operator out(h.rows(), h.cols());
    for (std::size_t i = 0; i < src.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) =
          (scale * phase[i]) * h.row(static_cast<Eigen::Index>(src[i]));
    return out;
  }

  Vec apply(const Vec& v) const {
    Vec out(v.size());
    for (std::size_t i = 0; i < src.size(); ++i)
      out(static_cast<Eigen::Index>(i)) = scale * phase[i] * v(static_cast<Eigen::Index>(src[i]));
    return out;
  }
};

/// The discretized irreducible representation pi_lambda(g). The translation
/// part of g must lie on the grid.
inline RepAction rep_action(const GroupSpec& spec, const GridSpace& space,
                            const std::vector<double>& lambda, const GroupElement& g) {
  require_lengths(spec, g);
  if (lambda.size() != static_cast<std::size_t>(spec.r))
    throw InputError("rep: lambda must have length r=" + std::to_string(spec.r));
  if (space.d() != spec.d)
    throw InputError("rep: grid dimension " + std::to_string(space.d()) + " does not match d=" +
                     std::to_string(spec.d) + " of " + spec.name());

  double central = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) central += lambda[i] * g.z[i];

  RepAction u;
  u.scale = cis(central);
  const std::size_t n = space.dim();
  u.phase.assign(n, cplx{1.0, 0.0});
  u.src.assign(n, 0);
  if (spec.d == 0) return u;

  const auto d = static_cast<std::size_t>(spec.d);
  std::vector<int> shift(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double steps = g.x[a] / space.spacing();
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9)
      throw InputError("rep: translation " + std::to_string(g.x[a]) +
                       " is not a multiple of the grid spacing " + std::to_string(space.spacing()));
    shift[a] = static_cast<int>(rounded);
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto idx = space.unflatten(i);
    for (std::size_t a = 0; a < d; ++a) idx[a] -= shift[a];
    u.src[i] = space.flatten(idx);
  }

  switch (spec.kind) {
    case GroupKind::heisenberg3: {
      // e^{-2 pi i lambda y t} f(t - x)
      const double lam = lambda[0], y = g.x[1];
      for (std::size_t i = 0; i < n; ++i) u.phase[i] = cis(-lam * y * space.point(i)[0]);
      break;
    }
    case GroupKind::twostep6: {
      // e^{-2 pi i <t, M y>} f(t - x),  M = [[l1, l2], [l2, l1]]
      const double l1 = lambda[0], l2 = lambda[1];
      const double y1 = g.x[2], y2 = g.x[3];
      const double my1 = l1 * y1 + l2 * y2, my2 = l2 * y1 + l1 * y2;
      for (std::size_t i = 0; i < n; ++i) {
        const auto t = space.point(i);
        u.phase[i] = cis(-(t[0] * my1 + t[1] * my2));
      }
      break;
    }
    case GroupKind::threestep5: {
      // X-part after Y-part: the chirp is evaluated at the source point t - x.
      const double lam = lambda[0], y1 = g.x[2], y2 = g.x[3];
      for (std::size_t i = 0; i < n; ++i) {
        const auto t = space.point(u.src[i]);
        const double cycles = 0.5 * lam * (t[0] * t[0] * y1 - 2 * t[0] * y2) - lam * t[1] * y1;
        u.phase[i] = cis(cycles);
      }
      break;
    }
    case GroupKind::abelian:
      break;
  }
  return u;
}

inline Operator rep_matrix(const GroupSpec& spec, const GridSpace& space,
                           const std::vector<double>& lambda, const GroupElement& g) {
  return rep_action(spec, space, lambda, g).matrix();
}

}  // namespace sis
