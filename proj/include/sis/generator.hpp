#pragma once

// Deterministic Fourier-side generator fields.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sis/error.hpp"
#include "sis/sizf.hpp"
#include "sis/transform.hpp"

namespace sis {

/// e^{-pi |lambda|^2} * (u (x) u^*), u a periodized Gaussian bump.
struct GaussianRankOne {
  std::vector<double> center;
  double width = 0.5;
};

/// 1_{box_u} (x) 1_{box_v}^* at every active lambda. Boxes are per-axis
/// half-open intervals [lo, hi).
struct IndicatorRankOne {
  std::vector<std::pair<double, double>> box_u;
  std::vector<std::pair<double, double>> box_v;
};

/// iid complex Gaussian entries at every active slot.
struct RandomGenerator {
  std::uint64_t seed = 0;
};

/// Like RandomGenerator but zero unless every component of j is -1 or 0.
struct BandlimitedRandom {
  std::uint64_t seed = 0;
};

/// prod_i sinc(lambda_i)^order times the identity (divided by its HS norm).
/// On abelian(1) with order 2 this is the Fourier transform of the hat
/// function B_2.
struct BSplineGenerator {
  int order = 2;
};

struct FileGenerator {
  std::string path;
};

using GeneratorSpec = std::variant<GaussianRankOne, IndicatorRankOne, RandomGenerator,
                                   BandlimitedRandom, BSplineGenerator, FileGenerator>;

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

namespace detail {

inline Vec indicator(const GridSpace& space, const std::vector<std::pair<double, double>>& box) {
  if (box.size() != static_cast<std::size_t>(space.d()))
    throw InputError("indicator box must have d=" + std::to_string(space.d()) + " intervals");
  Vec u(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto t = space.point(i);
    bool inside = true;
    for (std::size_t a = 0; a < t.size(); ++a)
      inside = inside && t[a] >= box[a].first && t[a] < box[a].second;
    u(static_cast<Eigen::Index>(i)) = inside ? 1.0 : 0.0;
  }
  return u;
}

inline Vec gaussian(const GridSpace& space, const std::vector<double>& center, double width) {
  if (center.size() != static_cast<std::size_t>(space.d()))
    throw InputError("gaussian center must have d=" + std::to_string(space.d()) + " components");
  if (!(width > 0)) throw InputError("gaussian width must be positive");
  const double w = space.window();
  Vec u(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto t = space.point(i);
    double r2 = 0.0;
    for (std::size_t a = 0; a < t.size(); ++a) {
      double dt = std::fmod(std::abs(t[a] - center[a]), w);
      dt = std::min(dt, w - dt);
      r2 += dt * dt;
    }
    u(static_cast<Eigen::Index>(i)) = std::exp(-r2 / (2 * width * width));
  }
  return u;
}

inline Operator random_operator(std::mt19937_64& rng, const GridSpace& space) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(space.dim());
  // unit expected HS norm
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n * n) * space.cell());
  Operator a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      a(i, k) = scale * cplx{re, im};
    }
  return a;
}

inline bool in_band(const std::vector<int>& j) {
  for (int v : j)
    if (v != -1 && v != 0) return false;
  return true;
}

}  // namespace detail

/// Builds the raw (Plancherel-measure) Fourier-side field for a generator.
inline OperatorField build_generator(const GeneratorSpec& spec, const LayoutPtr& layout) {
  const Layout& l = *layout;
  const GridSpace& space = l.space();
  OperatorField f = OperatorField::zeros(layout, Measure::plancherel);

  auto fill = [&](auto&& slot_value) {
    for (std::size_t s = 0; s < l.n_sigma(); ++s)
      for (std::size_t j = 0; j < l.n_fiber(); ++j)
        if (l.active(s, j)) f.at(s, j) = slot_value(s, j);
  };

  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, GaussianRankOne>) {
          const Vec u = detail::gaussian(space, g.center, g.width);
          const Operator base = rank_one(space, u, u);
          fill([&](std::size_t s, std::size_t j) {
            double l2 = 0.0;
            for (double v : l.lambda(s, j)) l2 += v * v;
            return Operator(std::exp(-3.14159265358979323846 * l2) * base);
          });
        } else if constexpr (std::is_same_v<G, IndicatorRankOne>) {
          const Operator base = rank_one(space, detail::indicator(space, g.box_u),
                                         detail::indicator(space, g.box_v));
          fill([&](std::size_t, std::size_t) { return base; });
        } else if constexpr (std::is_same_v<G, RandomGenerator>) {
          std::mt19937_64 rng(g.seed);
          fill([&](std::size_t, std::size_t) { return detail::random_operator(rng, space); });
        } else if constexpr (std::is_same_v<G, BandlimitedRandom>) {
          std::mt19937_64 rng(g.seed);
          fill([&](std::size_t, std::size_t j) {
            Operator a = detail::random_operator(rng, space);
            if (!detail::in_band(l.j(j))) a.setZero();
            return a;
          });
        } else if constexpr (std::is_same_v<G, BSplineGenerator>) {
          if (g.order < 1) throw InputError("bspline order must be >= 1");
          const auto n = static_cast<Eigen::Index>(space.dim());
          const Operator unit = Operator::Identity(n, n) / hs_norm(space, Operator::Identity(n, n));
          fill([&](std::size_t s, std::size_t j) {
            double amp = 1.0;
            for (double v : l.lambda(s, j)) amp *= std::pow(sinc(v), g.order);
            return Operator(amp * unit);
          });
        } else if constexpr (std::is_same_v<G, FileGenerator>) {
          f = read_sizf(g.path, layout);
        }
      },
      spec);
  return f;
}

}  // namespace sis
