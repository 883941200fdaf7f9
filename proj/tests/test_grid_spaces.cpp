#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/grid.hpp"
#include "kinklab/norms.hpp"
#include "kinklab/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace kinklab;

namespace {

constexpr double pi = std::numbers::pi;

// composite Simpson on [a,b] with n (even) panels
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

UniformGrid box(double L, std::size_t n) { return UniformGrid(-L / 2.0, L, n); }

// random smooth localized function: a few modulated Gaussians
std::function<double(double)> random_bump(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), ctr(-3.0, 3.0), wid(0.7, 2.0),
      kk(0.0, 2.0);
  std::vector<std::array<double, 4>> p(3);
  for (auto& b : p) b = {amp(rng), ctr(rng), wid(rng), kk(rng)};
  return [p](double x) {
    double s = 0.0;
    for (const auto& b : p) {
      const double z = (x - b[1]) / b[2];
      s += b[0] * std::exp(-z * z) * std::cos(b[3] * x);
    }
    return s;
  };
}

// random smooth function with limits: tanh front plus bumps
std::function<double(double)> random_front(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lim(-1.0, 1.0), st(0.3, 1.5);
  const double a = lim(rng), b = lim(rng), s = st(rng);
  auto bump = random_bump(rng);
  return [=](double x) { return a + b * std::tanh(s * x) + 0.5 * bump(x); };
}

} // namespace

TEST(UniformGrid, RejectsNonPowerOfTwo) {
  EXPECT_THROW(UniformGrid(0.0, 1.0, 100), ConfigError);
  EXPECT_THROW(UniformGrid(0.0, 1.0, 8), ConfigError);
  EXPECT_THROW(UniformGrid(0.0, -1.0, 64), ConfigError);
  const UniformGrid g(0.0, 2.0, 64);
  EXPECT_DOUBLE_EQ(g.dx(), 2.0 / 64.0);
}

TEST(UniformGrid, CenteredIsNodeAligned) {
  const UniformGrid g = UniformGrid::centered(0.05, 2048);
  EXPECT_TRUE(is_node_aligned(g));
  EXPECT_NEAR(g.x(1024), 0.0, 1e-14);
}

TEST(BracketPlus, ClosedFormsOutsideBlend) {
  EXPECT_EQ(bracket_plus(-5.0), 1.0);
  EXPECT_EQ(bracket_plus(0.0), 1.0);
  EXPECT_NEAR(bracket_plus(2.0), 2.2360679774997896, 1e-15);
  EXPECT_NEAR(bracket_minus(-2.0), std::sqrt(5.0), 1e-15);
  EXPECT_EQ(weight(WeightKind::bracket, 0.0), 1.0);
}

TEST(BracketPlus, BlendIsBoundedAndMonotone) {
  const double mid = bracket_plus(0.5);
  EXPECT_GE(mid, 1.0);
  EXPECT_LE(mid, std::sqrt(1.25));
  double prev = bracket_plus(-1.0);
  for (int i = 0; i <= 4000; ++i) {
    const double x = -1.0 + 3.0 * i / 4000.0;
    const double v = bracket_plus(x);
    EXPECT_GE(v, 1.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(BracketPlus, DerivativeContinuousAcrossJoins) {
  for (double x0 : {0.0, 1.0}) {
    for (double h : {1e-3, 5e-4}) {
      const double left = (bracket_plus(x0 - h) - bracket_plus(x0 - 2 * h)) / h;
      const double right = (bracket_plus(x0 + 2 * h) - bracket_plus(x0 + h)) / h;
      EXPECT_LT(std::abs(right - left), 10.0 * h) << "x0 = " << x0;
    }
  }
  // analytic derivative against central differences
  for (double x : {0.2, 0.5, 0.8, 1.5}) {
    const double h = 1e-5;
    const double fd = (bracket_plus(x + h) - bracket_plus(x - h)) / (2 * h);
    EXPECT_NEAR(bracket_plus_derivative(x), fd, 1e-7);
  }
}

TEST(L2Norms, Examples) {
  EXPECT_DOUBLE_EQ(l2_norm(LatticeSeq(-1, {0.0, 1.0, 0.0})), 1.0);
  EXPECT_DOUBLE_EQ(l2_norm(LatticeSeq(0, {3.0, 4.0})), 5.0);
  EXPECT_EQ(l2_norm(LatticeSeq::zeros(-5, 5)), 0.0);
  EXPECT_DOUBLE_EQ(l2_weighted_norm(LatticeSeq(0, {1.0})), 1.0);
  EXPECT_DOUBLE_EQ(l2_weighted_norm(LatticeSeq(1, {1.0})), 2.0);
  EXPECT_DOUBLE_EQ(l2_weighted_norm(LatticeSeq(0, {1.0, 0.0, 1.0})), std::sqrt(26.0));
}

TEST(LatticeSeq, OutsideWindowIsZero) {
  const LatticeSeq a(3, {1.0, 2.0});
  EXPECT_EQ(a.at_site(2), 0.0);
  EXPECT_EQ(a.at_site(4), 2.0);
  const LatticeSeq b(0, {1.0});
  const LatticeSeq c = a - b;
  EXPECT_EQ(c.n_min(), 0);
  EXPECT_EQ(c.at_site(0), -1.0);
  EXPECT_EQ(c.at_site(3), 1.0);
}

TEST(SpectralDerivative, SingleMode) {
  const double L = 10.0;
  const UniformGrid g = box(L, 64);
  const double k = 2 * pi / L;
  const auto f = GridFunction::from_function(g, [&](double x) { return std::sin(k * x); });
  const auto d1 = spectral_derivative(f, 1);
  const auto d3 = spectral_derivative(f, 3);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(d1[j], k * std::cos(k * g.x(j)), 1e-13);
    // (ik)^3 lifts roundoff in the top bins by k_max^3
    EXPECT_NEAR(d3[j], -k * k * k * std::cos(k * g.x(j)), 1e-11);
  }
  const auto c = GridFunction::from_function(g, [](double) { return 3.0; });
  EXPECT_LT(spectral_derivative(c, 2).max_abs(), 1e-13);
}

TEST(SpectralDerivative, CompositionMatchesHigherOrder) {
  // coarse enough that k_max^6 * roundoff stays far below the tolerance
  const UniformGrid g = box(20.0, 32);
  const auto f = GridFunction::from_function(
      g, [](double x) { return std::sin(2 * pi * x / 20.0) + 0.3 * std::cos(6 * pi * x / 20.0); });
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k) {
      const auto a = spectral_derivative(spectral_derivative(f, j), k);
      const auto b = spectral_derivative(f, j + k);
      EXPECT_LT((a - b).max_abs(), 1e-10 * std::max(1.0, b.max_abs()));
    }
}

TEST(Antiderivative, RoundTripAndZeroMode) {
  const double L = 16.0;
  const UniformGrid g = box(L, 128);
  const double k = 2 * pi / L;
  const auto c = GridFunction::from_function(g, [&](double x) { return std::cos(k * x); });
  const auto s = antiderivative(c);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(s[j], std::sin(k * g.x(j)) / k, 1e-13);
  EXPECT_EQ(antiderivative(GridFunction(g)).max_abs(), 0.0);
  const auto f = GridFunction::from_function(
      g, [&](double x) { return std::exp(-x * x) * std::sin(3 * x) + 0.2 * std::sin(2 * k * x); });
  const auto back = spectral_derivative(antiderivative(f), 1);
  EXPECT_LT((back - f).max_abs(), 1e-10 * f.max_abs());
  const auto one = GridFunction::from_function(g, [](double) { return 1.0; });
  EXPECT_THROW(antiderivative(one), ZeroModeError);
}

TEST(SobolevNorm, Examples) {
  const UniformGrid g(0.0, 2 * pi, 64);
  EXPECT_EQ(sobolev_norm(GridFunction(g), 3), 0.0);
  const auto s = GridFunction::from_function(g, [](double x) { return std::sin(x); });
  EXPECT_NEAR(sobolev_norm(s, 0), std::sqrt(pi), 1e-13);
  EXPECT_NEAR(sobolev_norm(s, 1), std::sqrt(2 * pi), 1e-13);
}

TEST(WeightedSobolevNorm, Examples) {
  const UniformGrid g = box(80.0, 2048);
  EXPECT_EQ(weighted_sobolev_norm(GridFunction(g), 2, 2), 0.0);
  const auto f = GridFunction::from_function(g, [](double x) { return std::exp(-x * x / 4); });
  EXPECT_NEAR(weighted_sobolev_norm(f, 2, 0), sobolev_norm(f, 2), 1e-14);
  const auto sech = GridFunction::from_function(g, [](double x) { return 1.0 / std::cosh(x); });
  const double oracle = std::sqrt(simpson(
      [](double x) {
        const double w = 1 + x * x;
        return w * w / (std::cosh(x) * std::cosh(x));
      },
      -40.0, 40.0, 20480));
  EXPECT_NEAR(weighted_sobolev_norm(sech, 0, 2), oracle, 1e-10 * oracle);
}

TEST(XkNorm, ConstantZeroAndKink) {
  const UniformGrid g = box(80.0, 1024);
  EXPECT_NEAR(xk_norm(GridFunction::from_function(g, [](double) { return -2.5; }), 3), 2.5, 1e-13);
  EXPECT_EQ(xk_norm(GridFunction(g), 2), 0.0);
  const double a = 1.0 / std::sqrt(2.0);
  const auto kink = GridFunction::from_function(g, [&](double x) { return a * std::tanh(a * x); });
  // max|f| = a on the box up to exp(-56); ||f'||^2 = a^4 * int sech^4(a x) = 4 a^3 / 3
  EXPECT_NEAR(xk_norm(kink, 1), a + std::sqrt(4 * a * a * a / 3), 1e-10);
  const double oracle2 = std::sqrt(simpson(
      [&](double x) {
        const double s = 1 / std::cosh(a * x), t = std::tanh(a * x);
        const double d1 = a * a * s * s, d2 = -2 * a * a * a * s * s * t;
        return d1 * d1 + d2 * d2;
      },
      -40.0, 40.0, 40960));
  EXPECT_NEAR(xk_norm(kink, 2), a + oracle2, 1e-9);
}

TEST(WeightedXkNorm, ConstantZeroAndTail) {
  const UniformGrid g = box(40.0, 512);
  EXPECT_NEAR(weighted_xk_norm(GridFunction::from_function(g, [](double) { return 0.7; }), 2, 2,
                               0.7, 0.7),
              1.4, 1e-13);
  EXPECT_EQ(weighted_xk_norm(GridFunction(g), 2, 2, 0.0, 0.0), 0.0);
  const UniformGrid small = box(4.0, 64);
  const auto k = GridFunction::from_function(small, [](double x) { return std::tanh(x); });
  EXPECT_THROW(weighted_xk_norm(k, 1, 2, 1.0, -1.0), TailMismatch);
}

TEST(WeightedXkNorm, KinkMatchesQuadratureAndBoxDoubling) {
  const double a = 1.0 / std::sqrt(2.0);
  auto f = [&](double x) { return a * std::tanh(a * x); };
  auto fp = [&](double x) { return a * a / (std::cosh(a * x) * std::cosh(a * x)); };
  // (f - f+)<x>_+^2 and its derivative, plus the mirror
  auto side = [&](double lim, bool plus, double x) {
    const double w = plus ? bracket_plus(x) : bracket_minus(x);
    const double dw = plus ? bracket_plus_derivative(x) : -bracket_plus_derivative(-x);
    const double h = (f(x) - lim) * w * w;
    const double dh = fp(x) * w * w + (f(x) - lim) * 2 * w * dw;
    return std::pair{h, dh};
  };
  double oracle = 2 * a;
  for (bool plus : {true, false}) {
    const double lim = plus ? a : -a;
    double mx = 0.0;
    for (int i = 0; i <= 80000; ++i) mx = std::max(mx, std::abs(side(lim, plus, -40 + i * 1e-3).first));
    const double l2 = std::sqrt(simpson(
        [&](double x) {
          const double d = side(lim, plus, x).second;
          return d * d;
        },
        -40.0, 40.0, 160000));
    oracle += mx + l2;
  }
  const double v80 = weighted_xk_norm(GridFunction::from_function(box(80.0, 2048), f), 1, 2, a, -a);
  const double v160 = weighted_xk_norm(GridFunction::from_function(box(160.0, 4096), f), 1, 2, a, -a);
  EXPECT_NEAR(v80, oracle, 1e-3 * oracle);
  EXPECT_NEAR(v160, v80, 0.01 * v80);
}

TEST(SampleToLattice, DirectEvaluation) {
  const LatticeSeq s = sample_to_lattice([](double x) { return x; }, 0.5, 0, 2);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  EXPECT_DOUBLE_EQ(s[2], 1.0);
  EXPECT_EQ(sample_to_lattice([](double) { return 0.0; }, 0.1, -3, 3).max_abs(), 0.0);
  EXPECT_THROW(sample_to_lattice([](double) { return 0.0; }, 1.5, 0, 1), ConfigError);
}

TEST(SampleToLattice, SamplingInequalityRatioBounded) {
  std::mt19937_64 rng(11);
  const UniformGrid g = box(60.0, 2048);
  double worst = 0.0, best = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const auto X = random_bump(rng);
    const double h1 = sobolev_norm(GridFunction::from_function(g, X), 1);
    for (double eps : {0.2, 0.1, 0.05}) {
      const long N = static_cast<long>(std::ceil(30.0 / eps));
      const double r = l2_norm(sample_to_lattice(X, eps, -N, N)) * std::sqrt(eps) / h1;
      worst = std::max(worst, r);
      best = std::min(best, r);
    }
  }
  EXPECT_LE(worst, 1.5);
  EXPECT_GT(best, 0.0);
}

TEST(PartialSums, Examples) {
  const LatticeSeq b = partial_sums(LatticeSeq(0, {1.0, -1.0}));
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  EXPECT_DOUBLE_EQ(b[1], 0.0);
  EXPECT_EQ(partial_sums(LatticeSeq::zeros(-3, 3)).max_abs(), 0.0);
  EXPECT_THROW(partial_sums(LatticeSeq(0, {1.0, 1.0})), SumMismatch);
}

TEST(PartialSums, LemmaConstantBoundsRandomAndWorstCase) {
  const long lo = -50, hi = 50;
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  const double C = partial_sum_constant(lo, hi);
  // operator norm of a -> b on zero-sum a, in the <n>^2-weighted metric, by power iteration
  std::vector<double> winv(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double m = static_cast<double>(lo + static_cast<long>(j));
    winv[j] = 1.0 / (1.0 + m * m);
  }
  const double wsum = std::inner_product(winv.begin(), winv.end(), winv.begin(), 0.0);
  auto project = [&](std::vector<double>& y) {  // enforce sum(winv * y) = 0
    const double s = std::inner_product(winv.begin(), winv.end(), y.begin(), 0.0);
    for (std::size_t j = 0; j < n; ++j) y[j] -= s / wsum * winv[j];
  };
  auto apply = [&](const std::vector<double>& y) {  // S^T S applied to winv*y, times winv
    std::vector<double> a(n), b(n), out(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = winv[j] * y[j];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) b[j] = (acc += a[j]);
    acc = 0.0;
    for (std::size_t j = n; j-- > 0;) out[j] = winv[j] * (acc += b[j]);
    return out;
  };
  std::vector<double> y(n, 1.0);
  y[0] = -3.0;
  project(y);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> z = apply(y);
    project(z);
    const double nz = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
    const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    lambda = nz / ny;
    for (std::size_t j = 0; j < n; ++j) y[j] = z[j] / nz;
  }
  const double op_norm = std::sqrt(lambda);
  EXPECT_LE(op_norm, C * (1 + 1e-9));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(n);
    for (auto& x : a) x = nd(rng);
    const double m = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    for (auto& x : a) x -= m;
    const LatticeSeq s(lo, a);
    worst = std::max(worst, l2_norm(partial_sums(s)) / l2_weighted_norm(s));
  }
  EXPECT_LE(worst, op_norm * (1 + 1e-9));
}

TEST(ProductInequalities, HkTimesXkBounded) {
  std::mt19937_64 rng(21);
  const UniformGrid g = box(60.0, 1024);
  for (int k : {1, 2, 3}) {
    std::vector<double> ratios;
    for (int trial = 0; trial < 200; ++trial) {
      auto fr = random_front(rng);
      auto gb = random_bump(rng);
      const auto f = GridFunction::from_function(g, fr);
      const auto h = GridFunction::from_function(g, gb);
      ratios.push_back(sobolev_norm(f * h, k) / (xk_norm(f, k) * sobolev_norm(h, k)));
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_LT(ratios.back(), 10.0 * ratios[ratios.size() / 2]) << "k = " << k;
  }
}

TEST(ProductInequalities, XkAlgebraBounded) {
  std::mt19937_64 rng(22);
  const UniformGrid g = box(60.0, 1024);
  for (int k : {1, 2, 3}) {
    std::vector<double> ratios;
    for (int trial = 0; trial < 200; ++trial) {
      const auto f = GridFunction::from_function(g, random_front(rng));
      const auto h = GridFunction::from_function(g, random_front(rng));
      ratios.push_back(xk_norm(f * h, k) / (xk_norm(f, k) * xk_norm(h, k)));
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_LT(ratios.back(), 10.0 * ratios[ratios.size() / 2]) << "k = " << k;
  }
}

TEST(Csv, GridFunctionRoundTrip) {
  const UniformGrid g = box(2.0, 16);
  const auto f = GridFunction::from_function(g, [](double x) { return std::exp(x) / 3.0; });
  const auto path = std::filesystem::temp_directory_path() / "kinklab_gridfn.csv";
  write_csv(path, f);
  std::vector<std::string> names;
  const auto cols = read_columns(path, &names);
  ASSERT_EQ(names, (std::vector<std::string>{"x", "value"}));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_EQ(cols[0][j], g.x(j));
    EXPECT_EQ(cols[1][j], f[j]);
  }
  const auto lpath = std::filesystem::temp_directory_path() / "kinklab_seq.csv";
  write_csv(lpath, LatticeSeq(-1, {0.1, 1.0 / 3.0}));
  const auto lc = read_columns(lpath, &names);
  EXPECT_EQ(names, (std::vector<std::string>{"n", "value"}));
  EXPECT_EQ(lc[0][0], -1.0);
  EXPECT_EQ(lc[1][1], 1.0 / 3.0);
}

TEST(StridedSampler, MatchesInterpolation) {
  const UniformGrid g = UniformGrid::centered(0.025, 1024);
  const auto h = GridFunction::from_function(g, [](double x) { return std::exp(-x * x); });
  const StridedSampler s(h);
  const auto v = s.sample(1, 0.0123, -40, 4, 20);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = g.dx() * (-40.0 + 4.0 * static_cast<double>(k)) + 0.0123;
    EXPECT_NEAR(v[k], -2 * x * std::exp(-x * x), 1e-12);
  }
  // outside the box the field counts as zero
  const auto far = s.sample(0, 0.0, 100000, 1, 3);
  for (double x : far) EXPECT_EQ(x, 0.0);
}
