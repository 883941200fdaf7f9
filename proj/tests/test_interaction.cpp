#include "kinklab/ansatz.hpp"
#include "kinklab/csv.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/interaction.hpp"
#include "kinklab/norms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace kinklab;

namespace {

constexpr double v24 = 1.0 / 24.0;
constexpr double kEps = 0.1;
constexpr double kDx = 0.05;

UniformGrid slow_grid() { return UniformGrid::centered(kDx, 2048); }

double speed() { return wave_speed(kEps, std::sqrt(12 * v24)); }

struct Fields {
  BackgroundField f = BackgroundField::kink(slow_grid(), v24);
  LocalizedField g = gaussian_pulse(slow_grid(), 0.3, 2.0);
};

// f and g carried to the slow time eps^2 T the forcing expects
std::pair<BackgroundField, LocalizedField> at_time(const Fields& s, double T) {
  const double tau = kEps * kEps * T;
  if (tau == 0.0) return {s.f, s.g};
  return {evolve_mkdv(s.f, {tau}, SolverConfig{})[0],
          evolve_gardner(s.g, s.f.f_plus(), {tau}, SolverConfig{})[0]};
}

double forcing_sup(const Fields& s, const UniformGrid& xg, double T) {
  const auto [f, g] = at_time(s, T);
  return interaction_forcing(f, g, xg, T, kEps, speed()).max_abs();
}

double sup_diff(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs(); }

} // namespace

TEST(InteractionForcing, VanishesWithoutInteraction) {
  const UniformGrid sg = slow_grid();
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 5.0, 20.0);
  const BackgroundField f = BackgroundField::kink(sg, v24);
  EXPECT_EQ(interaction_forcing(f, LocalizedField::zero(sg), xg, 0.0, kEps, speed()).max_abs(), 0.0);
  const BackgroundField flat = BackgroundField::constant(sg, f.f_plus());
  EXPECT_EQ(interaction_forcing(flat, gaussian_pulse(sg, 0.3, 2.0), xg, 0.0, kEps, speed()).max_abs(),
            0.0);
}

TEST(InteractionForcing, DensityMatchesPointwiseFormula) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 5.0, 20.0);
  const double T = 1.0, c = speed();
  const auto [f, g] = at_time(s, T);
  const GridFunction H = interaction_density(f, g, xg, T, kEps, c);
  const double fp = f.f_plus();
  double e = 0.0;
  for (std::size_t j = 0; j < xg.size(); j += 7) {
    const double xi = xg.x(j);
    const double fv = f.evaluate(xi + T), gx = xi - c * T;
    const double gv = gx >= g.grid().x_min() && gx < g.grid().x_max() ? evaluate_at(g.values(), gx) : 0.0;
    const double ref = (fv * fv - fp * fp) * gv + (fv - fp) * gv * gv;
    e = std::max(e, std::abs(H[j] - ref));
  }
  EXPECT_LT(e, 1e-12);
}

TEST(InteractionForcing, DecaysAtLeastQuadraticallyOnceSupportsSeparate) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 40.0, 20.0);
  const double s10 = forcing_sup(s, xg, 10.0), s20 = forcing_sup(s, xg, 20.0),
               s40 = forcing_sup(s, xg, 40.0);
  EXPECT_GT(s10, 0.0);
  EXPECT_LE(s20, s10 / 4.0);
  EXPECT_LE(s40, s20 / 4.0);
}

TEST(SolvePhiPsi, ZeroForcingGivesZeroFields) {
  const UniformGrid sg = slow_grid();
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 5.0, 20.0);
  const auto out = solve_phi_psi(BackgroundField::kink(sg, v24), LocalizedField::zero(sg), xg,
                                 {0.0, 2.0, 5.0}, kEps, speed());
  ASSERT_EQ(out.size(), 3u);
  for (const auto& p : out) {
    EXPECT_EQ(p.phi.max_abs(), 0.0);
    EXPECT_EQ(p.psi.max_abs(), 0.0);
  }
}

TEST(SolvePhiPsi, ZeroInitialData) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 0.0, 20.0);
  const auto out = solve_phi_psi(s.f, s.g, xg, {0.0}, kEps, speed());
  EXPECT_EQ(out[0].phi.max_abs(), 0.0);
  EXPECT_EQ(out[0].psi.max_abs(), 0.0);
}

class PhiTrajectory : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    const Fields s;
    xg_ = new UniformGrid(make_xi_grid(kDx, 10.0, 3.2, 20.0));
    const std::vector<double> Ts{3.0 - 2 * h_, 3.0 - h_, 3.0, 3.0 + h_, 3.0 + 2 * h_};
    traj_ = new std::vector<PhiPsiField>(solve_phi_psi(s.f, s.g, *xg_, Ts, kEps, speed()));
  }
  static void TearDownTestSuite() {
    delete traj_;
    delete xg_;
  }
  static constexpr double h_ = 0.01;
  static inline UniformGrid* xg_ = nullptr;
  static inline std::vector<PhiPsiField>* traj_ = nullptr;
};

TEST_F(PhiTrajectory, TimeDerivativeOfPhiIsPsi) {
  const auto& t = *traj_;
  // O(h^2) central differences at spacing h and 2h; the error must shrink by about 4
  GridFunction d1 = t[3].phi - t[1].phi;
  d1 *= 1.0 / (2 * h_);
  GridFunction d2 = t[4].phi - t[0].phi;
  d2 *= 1.0 / (4 * h_);
  const double e1 = sup_diff(d1, t[2].psi), e2 = sup_diff(d2, t[2].psi);
  EXPECT_LT(e1, 1e-3 * t[2].psi.max_abs());
  EXPECT_NEAR(e2 / e1, 4.0, 0.5);
}

TEST_F(PhiTrajectory, WaveEquationResidual) {
  const auto& t = *traj_;
  GridFunction dtt = t[3].phi - 2.0 * t[2].phi + t[1].phi;
  dtt *= 1.0 / (h_ * h_);
  const Fields s;
  const auto [f, g] = at_time(s, 3.0);
  const GridFunction res =
      dtt - spectral_derivative(t[2].phi, 2) - interaction_forcing(f, g, *xg_, 3.0, kEps, speed());
  EXPECT_LT(res.max_abs(), 1e-5);
  // differences of psi converge to the wave-equation value of psi_T at second order
  GridFunction d1 = t[3].psi - t[1].psi;
  d1 *= 1.0 / (2 * h_);
  GridFunction d2 = t[4].psi - t[0].psi;
  d2 *= 1.0 / (4 * h_);
  const double e1 = sup_diff(d1, t[2].dT_psi), e2 = sup_diff(d2, t[2].dT_psi);
  EXPECT_LT(e1, 1e-3 * t[2].dT_psi.max_abs());
  EXPECT_NEAR(e2 / e1, 4.0, 0.5);
}

TEST_F(PhiTrajectory, FourthOrderCancellation) {
  const auto& p = (*traj_)[2];
  const Fields s;
  const auto [f, g] = at_time(s, 3.0);
  const GridFunction H = interaction_density(f, g, *xg_, 3.0, kEps, speed());
  GridFunction r = spectral_derivative(p.phi, 1) - p.dT_inv_d_psi;
  GridFunction dh = spectral_derivative(H, 1);
  dh *= 0.5;
  r -= dh;
  EXPECT_LT(r.max_abs(), 1e-5);
  // inverse derivative of psi really inverts d_xi
  EXPECT_LT(sup_diff(spectral_derivative(p.inv_d_psi, 1), p.psi), 1e-8 * std::max(1.0, p.psi.max_abs()));
}

TEST_F(PhiTrajectory, CsvColumns) {
  const auto path = std::filesystem::temp_directory_path() / "kinklab_phi.csv";
  write_csv(path, (*traj_)[2]);
  std::vector<std::string> names;
  const auto cols = read_columns(path, &names);
  EXPECT_EQ(names, (std::vector<std::string>{"xi", "phi", "psi", "invdpsi"}));
  ASSERT_EQ(cols.size(), 4u);
  EXPECT_EQ(cols[1].size(), xg_->size());
  EXPECT_NEAR(cols[2][xg_->size() / 2], (*traj_)[2].psi[xg_->size() / 2], 1e-15);
}

TEST(SolvePhiPsi, BoundRatioStabilisesAsHorizonDoubles) {
  const Fields s;
  const double fn = weighted_xk_norm(s.f.total(), 3, 2, s.f.f_plus(), s.f.f_minus(), 1e-6);
  const double gn = weighted_sobolev_norm(s.g.values(), 3, 2);
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 100.0, 20.0);
  std::vector<double> Ts;
  for (int i = 0; i <= 40; ++i) Ts.push_back(2.5 * i);
  PhiSolverConfig pc;
  pc.panel_width = 0.05;
  const auto traj = solve_phi_psi(s.f, s.g, xg, Ts, kEps, speed(), pc);
  const std::vector<PhiPsiField> half(traj.begin(), traj.begin() + 21);
  const double r50 = phi_uniform_bound_report(half, fn, gn, 2);
  const double r100 = phi_uniform_bound_report(traj, fn, gn, 2);
  EXPECT_GT(r50, 0.0);
  EXPECT_TRUE(std::isfinite(r100));
  EXPECT_NEAR(r100 / r50, 1.0, 0.2);
  const double p50 = psi_uniform_bound_report(half, fn, gn, 2);
  const double p100 = psi_uniform_bound_report(traj, fn, gn, 2);
  EXPECT_NEAR(p100 / p50, 1.0, 0.2);
}

TEST(SolvePhiPsi, ReportOfZeroTrajectoryIsZero) {
  const UniformGrid xg = make_xi_grid(kDx, 5.0, 0.0, 5.0);
  EXPECT_EQ(phi_uniform_bound_report({PhiPsiField::zero(xg)}, 1.0, 1.0, 2), 0.0);
  EXPECT_EQ(psi_uniform_bound_report({PhiPsiField::zero(xg)}, 1.0, 1.0, 2), 0.0);
}

TEST(SolvePhiPsi, CoarsePanelsFailTheDoublingCheck) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 4.0, 20.0);
  PhiSolverConfig pc;
  pc.panel_width = 2.0;
  pc.doubling_check = true;
  EXPECT_THROW(solve_phi_psi(s.f, s.g, xg, {4.0}, kEps, speed(), pc), QuadratureUnresolved);
  pc.panel_width = 0.01;
  PhiSolveInfo info;
  EXPECT_NO_THROW(solve_phi_psi(s.f, s.g, xg, {4.0}, kEps, speed(), pc, &info));
  EXPECT_LT(info.doubling_change, 1e-6);
}

TEST(SolvePhiPsi, WavesReachingTheWindowEdgeAreReported) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 8.0, 0.0, 8.0);
  EXPECT_THROW(solve_phi_psi(s.f, s.g, xg, {20.0}, kEps, speed()), TailMismatch);
}

TEST(SolvePhiPsi, CheckpointsMustIncrease) {
  const Fields s;
  const UniformGrid xg = make_xi_grid(kDx, 10.0, 4.0, 20.0);
  EXPECT_THROW(solve_phi_psi(s.f, s.g, xg, {2.0, 1.0}, kEps, speed()), ConfigError);
}

TEST(KernelSup, MatchesDirectScanAndDecaysLikeInverseSquare) {
  const double c = speed();
  for (double tau : {10.0, 100.0}) {
    double best = 0.0;
    for (double x = -tau - 10; x <= c * tau + 10; x += 1e-3) {
      const double a = bracket_plus(x + tau), b = bracket(x - c * tau);
      best = std::max(best, 1.0 / (a * a * b * b));
    }
    EXPECT_NEAR(kernel_sup(tau, c), best, 1e-6 * best);
  }
  std::vector<double> lx, ly;
  for (double tau : {10.0, 31.6, 100.0, 316.0, 1000.0}) {
    lx.push_back(std::log(tau));
    ly.push_back(std::log(kernel_sup(tau, c)));
  }
  const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
  EXPECT_NEAR(slope, -2.0, 0.1);
}
