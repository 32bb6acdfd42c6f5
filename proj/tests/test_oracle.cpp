#include <random>

#include <gtest/gtest.h>

#include "sis/generator.hpp"
#include "sis/oracle.hpp"
#include "sis/range.hpp"

using namespace sis;

namespace {

LayoutPtr heis(int S = 4, int c = 2) {
  return make_layout(preset("heisenberg3"), S, FiberIndexSet::symmetric(1, 1), c * S);
}

FiberField random_fibers(const LayoutPtr& l, std::uint64_t seed) {
  return t_transform(build_generator(RandomGenerator{seed}, l));
}

Coefficients random_coeffs(std::mt19937_64& rng, const TranslateSystem& sys, int n) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> pk(0, sys.gamma1.size() - 1), pp(0, sys.n_generators() - 1);
  std::uniform_int_distribution<int> pm(0, sys.layout->S() - 1);
  Coefficients c;
  for (int i = 0; i < n; ++i) {
    std::vector<int> m(static_cast<std::size_t>(sys.layout->r()));
    for (auto& v : m) v = pm(rng);
    const double re = g(rng), im = g(rng);
    c[{pp(rng), sys.gamma1[pk(rng)], m}] = {re, im};
  }
  return c;
}

}  // namespace

TEST(TranslateGram, OrthonormalizedIsIdentity) {
  const auto l = heis(4, 3);
  const auto sys = orthonormalize_fibers(
      make_system({t_transform(build_generator(BandlimitedRandom{2}, l))}, 1));
  const auto g = translate_gram(sys);
  ASSERT_EQ(g.rows(), 36);
  EXPECT_LT((g - Eigen::MatrixXcd::Identity(36, 36)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TranslateGram, DiagonalIsGeneratorNorm) {
  const auto l = heis();
  const auto sys = make_system({random_fibers(l, 1), random_fibers(l, 2)}, 1);
  const auto g = translate_gram(sys);
  const auto keys = translate_index(sys);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double n = fiber_norm_sq(sys.generators[keys[i].phi]);
    EXPECT_NEAR(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() / n, 1.0, 1e-12);
  }
}

TEST(TranslateGram, EntriesAreTranslateInnerProducts) {
  const auto l = heis();
  const auto sys = make_system({random_fibers(l, 4)}, 1);
  const auto g = translate_gram(sys);
  const auto keys = translate_index(sys);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
  for (int t = 0; t < 10; ++t) {
    const auto i = pick(rng), j = pick(rng);
    const auto a = translate(sys.generators[0], {keys[i].k, keys[i].m});
    const auto b = translate(sys.generators[0], {keys[j].k, keys[j].m});
    const cplx want = field_inner(b, a);
    EXPECT_LT(std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - want), 1e-12);
  }
}

TEST(TranslateGram, SpectrumIsUnionOfFiberSpectra) {
  const auto l = heis(4, 3);
  const auto sys = make_system({random_fibers(l, 6)}, 1);
  auto oracle = hermitian_eigenvalues(translate_gram(sys));
  std::vector<double> fibers;
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    const auto ev = hermitian_eigenvalues(gramian(*l, fiber_system(s, sys)));
    fibers.insert(fibers.end(), ev.begin(), ev.end());
  }
  std::sort(fibers.rbegin(), fibers.rend());
  ASSERT_EQ(oracle.size(), fibers.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(oracle[i], fibers[i], 1e-9);
}

TEST(TranslateGram, SizeGuard) {
  // 2 generators x 2100 central shifts
  const auto l = make_layout(preset("abelian(1)"), 2100, FiberIndexSet::symmetric(1, 1), 2100);
  const auto sys = make_system({FiberField::zeros(l), FiberField::zeros(l)}, 0);
  EXPECT_THROW(translate_gram(sys), InputError);
}

TEST(EqualityLemma, RandomCoefficients) {
  std::mt19937_64 rng(12);
  for (const char* name : {"heisenberg3", "twostep6"}) {
    const auto g = preset(name);
    const auto l = g.r == 1 ? heis() : make_layout(g, 2, FiberIndexSet::symmetric(2, 1), 4);
    const auto sys = make_system({random_fibers(l, 3), random_fibers(l, 4)}, 1);
    for (int t = 0; t < 5; ++t) {
      const auto res = equality_lemma_check(random_coeffs(rng, sys, 12), sys);
      EXPECT_LT(res.rel_err, 1e-9) << name;
      EXPECT_LT(res.parseval_rel_err, 1e-12) << name;
    }
  }
}

TEST(EqualityLemma, SingleDelta) {
  const auto l = heis();
  const auto sys = make_system({random_fibers(l, 3)}, 1);
  const auto res = equality_lemma_check({{{0, {1, 0}, {3}}, 1.0}}, sys);
  const double n = fiber_norm_sq(sys.generators[0]);
  EXPECT_NEAR(res.lhs / n, 1.0, 1e-12);
  EXPECT_NEAR(res.rhs / n, 1.0, 1e-12);
}

TEST(EqualityLemma, AbelianBracketIdentity) {
  const auto l = make_layout(preset("abelian(1)"), 8, FiberIndexSet::symmetric(1, 2), 8);
  const auto raw = build_generator(RandomGenerator{5}, l);
  const auto sys = make_system({t_transform(raw)}, 0);
  std::mt19937_64 rng(3);
  const auto c = random_coeffs(rng, sys, 6);
  const auto res = equality_lemma_check(c, sys);
  // S^{-1} sum_sigma |P(sigma)|^2 sum_j |phi^(sigma + j)|^2
  double want = 0.0;
  for (std::size_t s = 0; s < l->n_sigma(); ++s) {
    cplx p{0, 0};
    for (const auto& [key, a] : c) p += a * std::exp(cplx(0, two_pi * l->sigma(s)[0] * key.m[0]));
    double bracket = 0.0;
    for (std::size_t j = 0; j < l->n_fiber(); ++j) bracket += std::norm(raw.at(s, j)(0, 0));
    want += std::norm(p) * bracket;
  }
  want /= static_cast<double>(l->n_sigma());
  EXPECT_NEAR(res.lhs / want, 1.0, 1e-12);
  EXPECT_NEAR(res.rhs / want, 1.0, 1e-12);
}

TEST(SumId, RandomZeroAndOrthonormal) {
  const auto l = heis(4, 3);
  const auto sys = make_system({random_fibers(l, 3), random_fibers(l, 4)}, 1);
  EXPECT_LT(sumid_check(random_fibers(l, 5), sys).rel_err, 1e-9);
  const auto z = sumid_check(FiberField::zeros(l), sys);
  EXPECT_EQ(z.direct, 0.0);
  EXPECT_EQ(z.fiber, 0.0);

  const auto on = orthonormalize_fibers(
      make_system({t_transform(build_generator(BandlimitedRandom{2}, l))}, 1));
  auto f = synthesis({{{0, {0, 0}, {1}}, 1.0}}, on);
  const auto r = sumid_check(f, on);
  EXPECT_NEAR(r.direct, 1.0, 1e-9);
  EXPECT_NEAR(r.fiber, 1.0, 1e-9);
}
