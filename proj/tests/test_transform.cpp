#include <cstdio>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "sis/error.hpp"
#include "sis/generator.hpp"
#include "sis/sizf.hpp"
#include "sis/transform.hpp"

using namespace sis;

namespace {

LayoutPtr heis(int S = 4, int c = 2, int half = 1) {
  return make_layout(preset("heisenberg3"), S, FiberIndexSet::symmetric(1, half), c * S);
}

std::size_t slot_of(const Layout& l, double lam) {
  for (std::size_t s = 0; s < l.n_sigma(); ++s)
    for (std::size_t j = 0; j < l.n_fiber(); ++j)
      if (std::abs(l.lambda(s, j)[0] - lam) < 1e-12) return s * l.n_fiber() + j;
  return l.n_slots();
}

}  // namespace

TEST(Layout, GridAndMask) {
  const auto l = heis(4, 2, 1);
  EXPECT_EQ(l->n_sigma(), 4u);
  EXPECT_EQ(l->n_fiber(), 3u);
  EXPECT_EQ(l->space().window(), 4);
  EXPECT_EQ(l->space().samples(), 8);
  // lambda = 0 sits at sigma = 0, j = 0 and is the only masked slot
  EXPECT_EQ(l->active_count(), 11u);
  EXPECT_FALSE(l->active(0, 1));
  EXPECT_DOUBLE_EQ(l->lambda(1, 0)[0], 0.25 - 1.0);
  EXPECT_DOUBLE_EQ(l->pf(2, 2), 1.5);
}

TEST(Layout, HugeEpsMasksEverything) {
  const auto l = make_layout(preset("heisenberg3"), 4, FiberIndexSet::symmetric(1, 1), 8, 10.0);
  EXPECT_EQ(l->active_count(), 0u);
}

TEST(Weight, AbelianIsIdentity) {
  const auto l = make_layout(preset("abelian(1)"), 8, FiberIndexSet::symmetric(1, 2), 8);
  const auto f = build_generator(RandomGenerator{3}, l);
  const auto w = weight(f);
  EXPECT_EQ(w.measure, Measure::lebesgue);
  for (std::size_t i = 0; i < f.data.size(); ++i) EXPECT_EQ(w.data[i], f.data[i]);
}

TEST(Weight, ScalesBySqrtPfaffianAndMasks) {
  const auto l = make_layout(preset("heisenberg3"), 4, FiberIndexSet::symmetric(1, 2), 8);
  auto f = OperatorField::zeros(l);
  for (auto& op : f.data) op.setIdentity();
  const auto w = weight(f);
  const auto at2 = slot_of(*l, 2.0);
  ASSERT_LT(at2, l->n_slots());
  EXPECT_NEAR(w.data[at2](3, 3).real(), std::sqrt(2.0), 1e-15);
  const auto at0 = slot_of(*l, 0.0);
  EXPECT_EQ(w.data[at0].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(weight(w), InputError);
}

TEST(Periodize, DeltaAndRoundTrip) {
  const auto l = heis();
  auto f = OperatorField::zeros(l, Measure::lebesgue);
  f.at(2, 1)(0, 0) = 1.0;
  const auto ff = periodize(f);
  std::size_t nonzero = 0;
  for (const auto& fv : ff.fibers)
    for (const auto& op : fv.slots) nonzero += op.cwiseAbs().maxCoeff() > 0 ? 1 : 0;
  EXPECT_EQ(nonzero, 1u);

  const auto g = weight(build_generator(RandomGenerator{4}, l));
  const auto back = deperiodize(periodize(g), l);
  for (std::size_t i = 0; i < g.data.size(); ++i) EXPECT_EQ(back.data[i], g.data[i]);
  EXPECT_THROW(periodize(build_generator(RandomGenerator{4}, l)), InputError);
}

TEST(Norms, ParsevalChainAcrossPresets) {
  std::vector<LayoutPtr> ls{
      heis(4, 2, 1),
      make_layout(preset("twostep6"), 2, FiberIndexSet::symmetric(2, 1), 4),
      make_layout(preset("threestep5"), 2, FiberIndexSet::symmetric(1, 1), 4),
      make_layout(preset("abelian(2)"), 4, FiberIndexSet::symmetric(2, 1), 4)};
  for (const auto& l : ls) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto f = build_generator(RandomGenerator{seed}, l);
      const double a = field_norm(weight(f));
      const double b = fiber_norm(t_transform(f));
      EXPECT_NEAR(a / b, 1.0, 1e-12) << l->group().name();
      EXPECT_NEAR(field_norm(f) / b, 1.0, 1e-12);
    }
  }
}

TEST(Norms, SingleSlot) {
  const auto l = heis(4, 2, 1);
  auto f = OperatorField::zeros(l);
  const auto at = slot_of(*l, 1.5);
  // unit HS norm: identity / sqrt(trace * cell)
  f.data[at].setIdentity();
  f.data[at] /= std::sqrt(8.0 * l->space().cell());
  EXPECT_NEAR(field_norm_sq(f), 1.5 / 4.0, 1e-15);
  EXPECT_EQ(field_norm(OperatorField::zeros(l)), 0.0);
  EXPECT_EQ(fiber_norm(FiberField::zeros(l)), 0.0);
}

TEST(TTransform, HeisenbergFiberIsWeightedSample) {
  const auto l = heis(4, 2, 1);
  const auto f = build_generator(RandomGenerator{12}, l);
  const auto t = t_transform(f);
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j) {
      const double w = l->active(s, j) ? std::sqrt(std::abs(l->lambda(s, j)[0])) : 0.0;
      EXPECT_LT((t.fibers[s].slots[j] - w * f.at(s, j)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(TTransform, AbelianSingleSlot) {
  const auto l = make_layout(preset("abelian(1)"), 4, FiberIndexSet::symmetric(1, 1), 4);
  auto f = OperatorField::zeros(l);
  f.at(1, 1)(0, 0) = cplx(0.5, -2);
  const auto t = t_transform(f);
  EXPECT_EQ(t.fibers[1].slots[1](0, 0), cplx(0.5, -2));
}

TEST(FiberInner, RealNonnegativeOnDiagonal) {
  const auto l = heis();
  const auto t = t_transform(build_generator(RandomGenerator{2}, l));
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const cplx v = fiber_inner(*l, t.fibers[s], t.fibers[s]);
    EXPECT_GE(v.real(), 0.0);
    EXPECT_NEAR(v.imag(), 0.0, 1e-14);
    // flattening preserves the fiber inner product
    const Vec x = flatten(*l, t.fibers[s]);
    EXPECT_NEAR(x.squaredNorm(), v.real(), 1e-12);
  }
}

TEST(Generator, Deterministic) {
  const auto l = heis();
  const auto a = build_generator(RandomGenerator{7}, l);
  const auto b = build_generator(RandomGenerator{7}, l);
  const auto c = build_generator(RandomGenerator{8}, l);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_EQ(a.data[i], b.data[i]);
  EXPECT_GT((a.data[5] - c.data[5]).norm(), 0.0);
}

TEST(Generator, BandlimitedSupport) {
  const auto l = heis(4, 3, 2);
  const auto f = build_generator(BandlimitedRandom{5}, l);
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j) {
      const int jj = l->j(j)[0];
      const double n = f.at(s, j).norm();
      if (jj == -1 || jj == 0) {
        if (l->active(s, j)) {
          EXPECT_GT(n, 0.0);
        }
      } else {
        EXPECT_EQ(n, 0.0);
      }
    }
}

TEST(Generator, IndicatorRankOneOnTwoStep) {
  const auto l = make_layout(preset("twostep6"), 2, FiberIndexSet::symmetric(2, 1), 4);
  const auto f = build_generator(
      IndicatorRankOne{{{0, 0.5}, {0, 0.5}}, {{0, 1}, {0, 1}}}, l);
  const auto& sp = l->space();
  Vec u = Vec::Zero(static_cast<Eigen::Index>(sp.dim())), v = u;
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    const auto p = sp.point(i);
    u(static_cast<Eigen::Index>(i)) = (p[0] < 0.5 && p[1] < 0.5) ? 1.0 : 0.0;
    v(static_cast<Eigen::Index>(i)) = (p[0] < 1.0 && p[1] < 1.0) ? 1.0 : 0.0;
  }
  const Operator want = rank_one(sp, u, v);
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j) {
      if (!l->active(s, j)) {
        EXPECT_EQ(f.at(s, j).norm(), 0.0);
        continue;
      }
      // same operator up to a positive scalar
      const cplx ratio = hs_inner(sp, f.at(s, j), want) / hs_inner(sp, want, want);
      EXPECT_GT(ratio.real(), 0.0);
      EXPECT_LT((f.at(s, j) - ratio * want).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Generator, BSplineIsSincSquared) {
  const auto l = make_layout(preset("abelian(1)"), 8, FiberIndexSet::symmetric(1, 3), 8);
  const auto f = build_generator(BSplineGenerator{2}, l);
  for (std::size_t s = 0; s < l->n_sigma(); ++s)
    for (std::size_t j = 0; j < l->n_fiber(); ++j) {
      const double lam = l->lambda(s, j)[0];
      EXPECT_NEAR(f.at(s, j)(0, 0).real(), std::pow(sinc(lam), 2), 1e-15);
    }
}

TEST(Sizf, RoundTripBitExact) {
  const auto l = heis();
  const auto f = build_generator(RandomGenerator{9}, l);
  const auto image = encode_sizf(f);
  const auto g = decode_sizf(image, l);
  ASSERT_EQ(f.data.size(), g.data.size());
  for (std::size_t i = 0; i < f.data.size(); ++i) EXPECT_EQ(f.data[i], g.data[i]);
  EXPECT_EQ(encode_sizf(g), image);

  const auto path = (std::filesystem::temp_directory_path() / "sis_roundtrip.sizf").string();
  write_sizf(path, f);
  EXPECT_EQ(read_file_bytes(path), image);
  std::remove(path.c_str());
}

TEST(Sizf, TruncatedNamesOffset) {
  const auto l = heis();
  const auto image = encode_sizf(build_generator(RandomGenerator{9}, l));
  try {
    decode_sizf(image.substr(0, 100), l);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 100"), std::string::npos) << e.what();
  }
  EXPECT_THROW(decode_sizf(image + "x", l), InputError);
}

TEST(Sizf, BadMagicAndMismatch) {
  const auto l = heis();
  auto image = encode_sizf(build_generator(RandomGenerator{9}, l));
  auto bad = image;
  bad[0] = 'X';
  EXPECT_THROW(decode_sizf(bad, l), InputError);
  const auto other = make_layout(preset("twostep6"), 2, FiberIndexSet::symmetric(2, 1), 4);
  try {
    decode_sizf(image, other);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos) << e.what();
  }
  EXPECT_THROW(decode_sizf(image, heis(4, 3, 1)), InputError);
}
