#include <random>

#include <gtest/gtest.h>

#include "sis/action.hpp"
#include "sis/error.hpp"
#include "sis/generator.hpp"
#include "sis/range.hpp"

using namespace sis;

namespace {

LayoutPtr heis(int S = 4, int c = 3) {
  return make_layout(preset("heisenberg3"), S, FiberIndexSet::symmetric(1, 1), c * S);
}

FiberField random_fibers(const LayoutPtr& l, std::uint64_t seed) {
  return t_transform(build_generator(RandomGenerator{seed}, l));
}

TranslateSystem orthonormal_heis(const LayoutPtr& l, std::uint64_t seed = 3) {
  return orthonormalize_fibers(make_system({t_transform(build_generator(BandlimitedRandom{seed}, l))}, 1));
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd diag(std::initializer_list<double> v) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

}  // namespace

TEST(FiberSystem, Shapes) {
  const auto l = heis();
  const auto phi = random_fibers(l, 1);
  const auto one = fiber_system(2, make_system({phi}, 0));
  ASSERT_EQ(one.size(), 1u);
  for (std::size_t j = 0; j < l->n_fiber(); ++j) EXPECT_EQ(one[0].slots[j], phi.fibers[2].slots[j]);

  const auto nine = fiber_system(2, make_system({phi}, 1));
  ASSERT_EQ(nine.size(), 9u);
  const double n0 = fiber_norm_sq(*l, phi.fibers[2]);
  for (const auto& v : nine) EXPECT_NEAR(fiber_norm_sq(*l, v) / n0, 1.0, 1e-12);

  const auto la = make_layout(preset("abelian(1)"), 4, FiberIndexSet::symmetric(1, 1), 4);
  EXPECT_EQ(fiber_system(0, make_system({random_fibers(la, 1), random_fibers(la, 2)}, 3)).size(), 2u);
}

TEST(Gramian, DuplicatedVector) {
  const auto l = heis();
  auto v = random_fibers(l, 4).fibers[1];
  const double n = std::sqrt(fiber_norm_sq(*l, v));
  for (auto& op : v.slots) op /= n;
  const auto g = gramian(*l, {v, v});
  EXPECT_LT(max_abs(g - Eigen::MatrixXcd::Ones(2, 2)), 1e-12);
  const auto ev = hermitian_eigenvalues(g);
  EXPECT_NEAR(ev[0], 2.0, 1e-12);
  EXPECT_NEAR(ev[1], 0.0, 1e-12);
  EXPECT_THROW(gramian(*l, {}), InputError);
}

TEST(Gramian, PositiveSemidefinite) {
  const auto l = heis();
  const auto sys = make_system({random_fibers(l, 2), random_fibers(l, 3)}, 1);
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const auto g = gramian(*l, fiber_system(s, sys));
    EXPECT_LT(max_abs(g - g.adjoint()), 1e-15);
    EXPECT_GE(hermitian_eigenvalues(g).back(), -1e-10);
  }
}

TEST(FrameBounds, Examples) {
  const auto id = frame_bounds(Eigen::MatrixXcd::Identity(3, 3), BoundsMode::frame);
  EXPECT_DOUBLE_EQ(*id.A, 1.0);
  EXPECT_DOUBLE_EQ(id.B, 1.0);

  const auto d = frame_bounds(diag({4, 1, 0.25}), BoundsMode::riesz);
  EXPECT_NEAR(*d.A, 0.25, 1e-15);
  EXPECT_NEAR(d.B, 4.0, 1e-15);
  EXPECT_EQ(d.rank, 3u);

  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(2, 2);
  const auto f = frame_bounds(ones, BoundsMode::frame);
  EXPECT_NEAR(*f.A, 2.0, 1e-14);
  EXPECT_NEAR(f.B, 2.0, 1e-14);
  EXPECT_EQ(f.rank, 1u);
  EXPECT_THROW(frame_bounds(ones, BoundsMode::riesz), DegenerateError);

  const auto b = frame_bounds(ones, BoundsMode::bessel);
  EXPECT_FALSE(b.A.has_value());
  EXPECT_NEAR(b.B, 2.0, 1e-14);

  const auto z = frame_bounds(Eigen::MatrixXcd::Zero(2, 2), BoundsMode::frame);
  EXPECT_EQ(z.rank, 0u);
  EXPECT_EQ(*z.A, 0.0);
}

TEST(EssentialBounds, OrthonormalizedIsTight) {
  const auto l = heis();
  const auto sys = orthonormal_heis(l);
  for (auto mode : {BoundsMode::frame, BoundsMode::riesz}) {
    const auto rep = essential_bounds(sys, mode);
    EXPECT_NEAR(*rep.A, 1.0, 1e-9);
    EXPECT_NEAR(rep.B, 1.0, 1e-9);
  }
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    EXPECT_NEAR(fiber_norm_sq(*l, sys.generators[0].fibers[s]), 1.0, 1e-9);
}

TEST(EssentialBounds, ScaledOrthonormalFibers) {
  const auto l = heis();
  auto sys = orthonormal_heis(l);
  // c(sigma) sweeps [0.5, 2]
  std::vector<double> c{0.5, 1.0, 1.7, 2.0};
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (auto& op : sys.generators[0].fibers[s].slots) op *= c[s];
  const auto rep = essential_bounds(sys, BoundsMode::riesz);
  EXPECT_NEAR(*rep.A, 0.25, 1e-8);
  EXPECT_NEAR(rep.B, 4.0, 1e-8);
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    EXPECT_NEAR(*rep.per_sigma[s].bounds.A, c[s] * c[s], 1e-8);
    EXPECT_NEAR(rep.per_sigma[s].bounds.B, c[s] * c[s], 1e-8);
  }
}

TEST(EssentialBounds, AbelianBSpline) {
  const auto l = make_layout(preset("abelian(1)"), 64, FiberIndexSet::symmetric(1, 64), 64);
  const auto sys = make_system({t_transform(build_generator(BSplineGenerator{2}, l))}, 0);
  const auto rep = essential_bounds(sys, BoundsMode::frame);
  EXPECT_NEAR(*rep.A / (1.0 / 3.0), 1.0, 0.02);
  EXPECT_NEAR(rep.B, 1.0, 0.02);
  // bracket sum_j sinc^4(sigma + j) = (2 + cos 2 pi sigma) / 3 up to the box truncation
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const double want = (2.0 + std::cos(two_pi * l->sigma(s)[0])) / 3.0;
    EXPECT_NEAR(rep.per_sigma[s].bounds.B, want, 1e-6);
  }
}

TEST(EssentialBounds, RieszErrorNamesSigma) {
  const auto l = heis(4, 2);
  const auto phi = random_fibers(l, 1);
  try {
    essential_bounds(make_system({phi, phi}, 1), BoundsMode::riesz);
    FAIL() << "expected an error";
  } catch (const DegenerateError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma="), std::string::npos) << e.what();
  }
}

TEST(RangeSample, ProjectionProperties) {
  const auto l = heis(4, 2);
  const auto sys = make_system({random_fibers(l, 7)}, 1);
  const auto f = random_fibers(l, 9);
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const auto rs = range_sample(s, sys);
    EXPECT_LT(max_abs(rs.basis.adjoint() * rs.basis - Eigen::MatrixXcd::Identity(rs.rank(), rs.rank())),
              1e-12);
    const auto b0 = unflatten(*l, rs.basis.col(0));
    EXPECT_LT((flatten(*l, project(*l, rs, b0)) - rs.basis.col(0)).norm(), 1e-10);
    const auto p1 = project(*l, rs, f.fibers[s]);
    EXPECT_LT((flatten(*l, project(*l, rs, p1)) - flatten(*l, p1)).norm(), 1e-10);
    for (const auto& k : sys.gamma1)
      EXPECT_LT(residual_norm(*l, rs, fiber_action(*l, s, k, sys.generators[0].fibers[s])), 1e-10);
  }
}

TEST(InvarianceDefect, ZeroShiftAndAbelian) {
  const auto l = heis(4, 2);
  const auto sys = make_system({random_fibers(l, 7)}, 1);
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const auto rs = range_sample(s, sys);
    EXPECT_LT(invariance_defect(*l, rs, {0, 0}), 1e-12);
    // boundary shifts leave the truncated span; the defect is only reported
    const double d = invariance_defect(*l, rs, {1, 0});
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_LE(d, 1.0 + 1e-12);
  }
  const auto la = make_layout(preset("abelian(2)"), 4, FiberIndexSet::symmetric(2, 1), 4);
  const auto sa = make_system({random_fibers(la, 1)}, 1);
  EXPECT_LT(invariance_defect(*la, range_sample(3, sa), {}), 1e-12);
}

TEST(Membership, TranslatesAndProjections) {
  const auto l = heis(4, 2);
  const auto sys = make_system({random_fibers(l, 7)}, 1);
  EXPECT_LT(membership_residual(translate(sys.generators[0], {{1, -1}, {2}}), sys).max, 1e-9);
  auto f = random_fibers(l, 30);
  for (std::size_t s = 0; s < l->n_sigma(); ++s) f.fibers[s] = project(*l, range_sample(s, sys), f.fibers[s]);
  EXPECT_LT(membership_residual(f, sys).max, 1e-9);
}

TEST(Membership, HalfShiftLeavesTheSpace) {
  const auto g = preset("twostep6");
  const auto l = make_layout(g, 2, FiberIndexSet::symmetric(2, 1), 4);
  const auto raw = build_generator(IndicatorRankOne{{{0, 0.5}, {0, 0.5}}, {{0, 1}, {0, 1}}}, l);
  const auto sys = make_system({t_transform(raw)}, 1);
  auto moved = raw;
  const GroupElement half{{0.5, 0.5, 0, 0}, {0, 0}};
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j)
      moved.at(s, j) = rep_matrix(g, l->space(), l->lambda(s, j), half) * raw.at(s, j);
  EXPECT_GT(membership_residual(t_transform(moved), sys).max, 1e3 * default_rank_rel_tol);
  EXPECT_LT(membership_residual(translate(sys.generators[0], {{1, 0, 0, -1}, {1, 0}}), sys).max, 1e-9);
}

TEST(Orthonormalize, Guards) {
  const auto l = heis(4, 2);
  const auto phi = random_fibers(l, 1);
  EXPECT_THROW(orthonormalize_fibers(make_system({phi, phi}, 1)), InputError);
  const auto lt = make_layout(preset("twostep6"), 2, FiberIndexSet::symmetric(2, 1), 4);
  EXPECT_THROW(orthonormalize_fibers(make_system({random_fibers(lt, 1)}, 1)), InputError);
}

TEST(Orthonormalize, KeepsBandlimitedSupport) {
  const auto l = heis(4, 3);
  const auto sys = orthonormal_heis(l, 11);
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j)
      if (l->j(j)[0] == 1) {
        EXPECT_EQ(sys.generators[0].fibers[s].slots[j].norm(), 0.0);
      }
}
