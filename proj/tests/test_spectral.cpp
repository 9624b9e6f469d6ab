#include <gtest/gtest.h>

#include <chrono>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "beamobs/quadrature.hpp"
#include "beamobs/spectral.hpp"
#include "support.hpp"

using namespace beamobs;
using beamobs::testing::hinged_lambda;
using beamobs::testing::hinged_system;
using beamobs::testing::reference_system;

namespace {

// Frozen from an independent prototype (dense determinant scan + bisection).
constexpr double kReferenceLambdas[] = {767.1325737194255,  6532.846209805487,
                                        15231.117935172415, 40392.5428539803,
                                        96946.69753431015,  194805.02705740448};
constexpr double kReferenceMu[] = {2.488044319274997, 4.250266037613767, 5.251984689298,
                                   6.702175636644279, 8.342068679132606, 9.932087709202655};

/// Rayleigh-Ritz in the hinged sine basis; the shaker enters as rank-one
/// stiffness and mass updates. Upper bounds that converge as the basis grows.
std::vector<double> ritz_eigenvalues(const BeamSystem& s, int basis, int count) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(basis, basis);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis, basis);
  Eigen::VectorXd phi(basis);
  for (int n = 0; n < basis; ++n) {
    const double kn = (n + 1) * std::numbers::pi / s.length;
    k(n, n) = s.flexural_rigidity() * std::pow(kn, 4) * s.length / 2.0;
    m(n, n) = s.mass_per_length * s.length / 2.0;
    phi(n) = std::sin(kn * s.attach_point);
  }
  k += s.shaker_stiffness * phi * phi.transpose();
  m += s.shaker_mass * phi * phi.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, m, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int j = 0; j < count; ++j) out.push_back(solver.eigenvalues()(j));
  return out;
}

double composite_gauss(const std::function<double(double)>& f, double a, double b, int panels) {
  const GaussLegendreRule rule(10);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = a + (b - a) * (p + 1) / panels;
    total += rule.integrate(f, lo, hi);
  }
  return total;
}

class ReferenceModes : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { modes_ = compute_modes(reference_system(), 6); }
  static inline std::vector<Mode> modes_;
};

}  // namespace

TEST(Wavenumber, RoundTrip) {
  const auto s = reference_system();
  for (double lambda : {1.0, 767.0, 1e6})
    EXPECT_NEAR(eigenvalue_of(wavenumber_of(lambda, s), s) / lambda, 1.0, 1e-14);
}

TEST(CharDet, RejectsNonPositiveWavenumber) {
  EXPECT_THROW((void)char_det(0.0, reference_system()), ValidationError);
}

TEST(CharDet, FiniteForLargeWavenumbers) {
  const auto s = reference_system();
  for (double mu : {50.0, 400.0, 2000.0}) EXPECT_TRUE(std::isfinite(char_det(mu, s))) << mu;
}

TEST(Spectrum, HingedLimitExact) {
  const auto s = hinged_system();
  const auto seeds = find_eigenvalues(s, 6);
  ASSERT_EQ(seeds.size(), 6u);
  for (int j = 1; j <= 6; ++j) {
    EXPECT_NEAR(seeds[j - 1].lambda / hinged_lambda(s, j), 1.0, 1e-8) << j;
    EXPECT_NEAR(seeds[j - 1].mu * s.length / std::numbers::pi, j, 1e-9) << j;
  }
  EXPECT_NEAR(seeds[0].lambda, 157.772889, 1e-5);
}

TEST(Spectrum, HingedModeShapesAreSines) {
  const auto s = hinged_system();
  const auto modes = compute_modes(s, 6);
  for (int j = 1; j <= 6; ++j) {
    const double k = j * std::numbers::pi / s.length;
    double peak = 0.0;
    for (int i = 0; i < kNormalizationGridPoints; ++i)
      peak = std::max(peak, std::abs(std::sin(k * s.length * i / (kNormalizationGridPoints - 1))));
    for (double x : {0.1, 0.37, 0.9, 1.4, 1.41, 1.8}) {
      EXPECT_NEAR(mode_eval(modes[j - 1], x, 0), std::sin(k * x) / peak, 1e-8) << j << ' ' << x;
      EXPECT_NEAR(mode_eval(modes[j - 1], x, 2), -k * k * std::sin(k * x) / peak, 1e-8 * k * k);
    }
    EXPECT_NEAR(modes[j - 1].norm_h_sq, s.mass_per_length * s.length / 2.0 / (peak * peak), 1e-10);
  }
}

TEST(Spectrum, ApproachesHingedLimit) {
  const auto hinged = hinged_system();
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {1e-3, 1e-6}) {
    auto s = reference_system();
    s.shaker_mass *= scale;
    s.shaker_stiffness *= scale;
    const auto seeds = find_eigenvalues(s, 6);
    double worst = 0.0;
    for (int j = 1; j <= 6; ++j)
      worst = std::max(worst, std::abs(seeds[j - 1].lambda / hinged_lambda(hinged, j) - 1.0));
    EXPECT_LT(worst, 20.0 * scale) << scale;
    EXPECT_LT(worst, previous);
    previous = worst;
  }
}

TEST(Spectrum, ReferenceValuesFrozen) {
  const auto seeds = find_eigenvalues(reference_system(), 6);
  ASSERT_EQ(seeds.size(), 6u);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(seeds[j].lambda / kReferenceLambdas[j], 1.0, 1e-10) << j;
    EXPECT_NEAR(seeds[j].mu / kReferenceMu[j], 1.0, 1e-11) << j;
  }
}

TEST(Spectrum, AgreesWithRitzOracle) {
  const auto s = reference_system();
  const auto seeds = find_eigenvalues(s, 6);
  const auto ritz = ritz_eigenvalues(s, 400, 6);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(seeds[j].lambda / ritz[j], 1.0, 1e-5) << j;
    // Ritz values are upper bounds, up to the generalized eigensolver roundoff.
    EXPECT_LE(seeds[j].lambda, ritz[j] * (1.0 + 1e-9)) << j;
  }
}

TEST(Spectrum, RandomSystemsAgreeWithRitz) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 8; ++draw) {
    BeamSystem s;
    s.length = 0.5 + 2.0 * u(rng);
    s.attach_point = s.length * (0.1 + 0.8 * u(rng));
    s.youngs_modulus = 7e10;
    s.area_moment = 1e-10 * (0.5 + u(rng));
    s.mass_per_length = 0.2 + u(rng);
    s.shaker_mass = 0.2 * u(rng);
    s.shaker_stiffness = 5000.0 * u(rng);
    const auto seeds = find_eigenvalues(s, 5);
    const auto ritz = ritz_eigenvalues(s, 400, 5);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(seeds[j].lambda / ritz[j], 1.0, 1e-4) << draw << ' ' << j;
  }
}

TEST(Spectrum, StrictlyIncreasingAndPositive) {
  const auto seeds = find_eigenvalues(reference_system(), 12);
  ASSERT_EQ(seeds.size(), 12u);
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    EXPECT_GT(seeds[j].lambda, 0.0);
    if (j > 0) {
      EXPECT_GT(seeds[j].lambda, seeds[j - 1].lambda);
    }
  }
}

TEST(Spectrum, InterlacesWithHingedSpectrum) {
  // The shaker is a rank-one perturbation: mu_j lies in ((j-1) pi/l, (j+1) pi/l].
  const auto s = reference_system();
  const auto seeds = find_eigenvalues(s, 10);
  for (int j = 1; j <= 10; ++j) {
    EXPECT_GT(seeds[j - 1].mu, (j - 1) * std::numbers::pi / s.length);
    EXPECT_LE(seeds[j - 1].mu, (j + 1) * std::numbers::pi / s.length);
  }
}

TEST(Spectrum, EquivariantUnderMaterialScaling) {
  const auto s = reference_system();
  auto t = s;
  t.youngs_modulus *= 4.0;
  t.shaker_stiffness *= 4.0;
  const auto a = find_eigenvalues(s, 6);
  const auto b = find_eigenvalues(t, 6);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(b[j].lambda / (4.0 * a[j].lambda), 1.0, 1e-10);
    EXPECT_NEAR(b[j].mu / a[j].mu, 1.0, 1e-10);
  }
}

TEST(Spectrum, ZeroCountIsError) {
  EXPECT_THROW((void)find_eigenvalues(reference_system(), 0), ValidationError);
}

TEST_F(ReferenceModes, NormalizationAndSign) {
  for (const auto& m : modes_) {
    EXPECT_NEAR(max_abs_on_grid(m), 1.0, 1e-14);
    EXPECT_GT(mode_eval(m, 0.0, 1), 0.0);
    EXPECT_NEAR(mode_eval(m, 0.0, 0), 0.0, 1e-14);
    EXPECT_NEAR(mode_eval(m, m.length, 0), 0.0, 1e-12);
    EXPECT_NEAR(mode_eval(m, 0.0, 2), 0.0, 1e-12 * m.mu * m.mu);
    EXPECT_NEAR(mode_eval(m, m.length, 2), 0.0, 1e-9 * m.mu * m.mu);
  }
}

TEST_F(ReferenceModes, InterfaceConditions) {
  for (const auto& m : modes_) EXPECT_LT(interface_residuals(m, reference_system()).worst(), 1e-9);
}

TEST_F(ReferenceModes, ThirdDerivativeAtAttachPointNeedsSide) {
  EXPECT_THROW((void)mode_eval(modes_[0], 1.4, 3), std::invalid_argument);
  EXPECT_NO_THROW((void)mode_eval(modes_[0], 1.4, 3, Side::left));
}

TEST_F(ReferenceModes, Orthogonality) {
  const auto s = reference_system();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < i; ++j) {
      const double scale = std::sqrt(modes_[i].norm_h_sq * modes_[j].norm_h_sq);
      EXPECT_LE(std::abs(inner_h(modes_[i], modes_[j], s)), 1e-8 * scale) << i << ',' << j;
      EXPECT_LE(std::abs(bending_form(modes_[i], modes_[j], s)),
                1e-8 * scale * modes_[i].lambda) << i << ',' << j;
    }
}

TEST_F(ReferenceModes, RayleighIdentity) {
  const auto s = reference_system();
  for (const auto& m : modes_) {
    EXPECT_GT(m.lambda, 0.0);
    EXPECT_NEAR(bending_form(m, m, s) / (m.lambda * inner_h(m, m, s)), 1.0, 1e-6);
  }
}

TEST_F(ReferenceModes, OperatorIsSymmetric) {
  const auto s = reference_system();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double lij = operator_form(modes_[i], modes_[j], s);
      const double lji = operator_form(modes_[j], modes_[i], s);
      const double scale = modes_[5].lambda * std::sqrt(modes_[i].norm_h_sq * modes_[j].norm_h_sq);
      EXPECT_NEAR(lij, lji, 1e-8 * scale) << i << ',' << j;
      EXPECT_NEAR(lij, modes_[i].lambda * inner_h(modes_[i], modes_[j], s), 1e-8 * scale);
    }
}

TEST_F(ReferenceModes, InnerProductMatchesQuadrature) {
  const auto s = reference_system();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) {
      const auto f = [&](double x) { return mode_eval(modes_[i], x, 0) * mode_eval(modes_[j], x, 0); };
      const double quad = s.mass_per_length * (composite_gauss(f, 0.0, s.attach_point, 40) +
                                               composite_gauss(f, s.attach_point, s.length, 40)) +
                          s.shaker_mass * mode_eval(modes_[i], s.attach_point, 0) *
                              mode_eval(modes_[j], s.attach_point, 0);
      EXPECT_NEAR(inner_h(modes_[i], modes_[j], s), quad, 1e-12) << i << ',' << j;

      const auto g = [&](double x) { return mode_eval(modes_[i], x, 2) * mode_eval(modes_[j], x, 2); };
      const double bend = s.flexural_rigidity() * (composite_gauss(g, 0.0, s.attach_point, 40) +
                                                   composite_gauss(g, s.attach_point, s.length, 40)) +
                          s.shaker_stiffness * mode_eval(modes_[i], s.attach_point, 0) *
                              mode_eval(modes_[j], s.attach_point, 0);
      EXPECT_NEAR(bending_form(modes_[i], modes_[j], s), bend, 1e-10 * modes_[5].lambda);
    }
}

TEST_F(ReferenceModes, ScalingIsConsistent) {
  const auto s = reference_system();
  const Mode m = modes_[2].scaled(-2.5);
  EXPECT_NEAR(m.norm_h_sq, inner_h(m, m, s), 1e-12);
  EXPECT_NEAR(mode_eval(m, 0.7, 2), -2.5 * mode_eval(modes_[2], 0.7, 2), 1e-12);
}

TEST_F(ReferenceModes, AttachPointValuesFrozen) {
  // W(l0) and ||W||_H^2 from the prototype, up to the W'(0) > 0 sign rule.
  const double w_l0[] = {0.1432, -0.7408, 0.7633, 0.0442, -0.6863, 0.8554};
  const double norms[] = {0.4197, 0.4883, 0.3659, 0.5592, 0.5262, 0.5625};
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(mode_eval(modes_[j], 1.4, 0), w_l0[j], 1e-4) << j;
    EXPECT_NEAR(modes_[j].norm_h_sq, norms[j], 1e-4) << j;
  }
}

TEST(Eigenfunction, RejectsNonRoot) {
  EXPECT_THROW((void)eigenfunction(reference_system(), 1000.0), SolverError);
  EXPECT_THROW((void)eigenfunction(reference_system(), -1.0), ValidationError);
}

TEST(Eigenfunction, ShakerAtNodeKeepsHingedMode) {
  // With l0 = l/2 the even hinged modes have a node at the shaker and are
  // unaffected by it.
  auto s = reference_system();
  s.attach_point = s.length / 2.0;
  const auto seeds = find_eigenvalues(s, 8);
  for (int n : {2, 4}) {
    const double target = hinged_lambda(s, n);
    const auto it = std::min_element(seeds.begin(), seeds.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.lambda - target) < std::abs(b.lambda - target);
    });
    EXPECT_NEAR(it->lambda / target, 1.0, 1e-9) << n;
    const Mode m = eigenfunction(s, it->lambda);
    EXPECT_NEAR(mode_eval(m, s.attach_point, 0), 0.0, 1e-9);
  }
}

TEST(Spectrum, HingedSpectrumFastEnough) {
  const auto start = std::chrono::steady_clock::now();
  (void)compute_modes(hinged_system(), 6);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(elapsed, 1.0);
}
