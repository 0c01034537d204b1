#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fracdamp/random_fields.hpp"
#include "fracdamp/spectral.hpp"
#include "fracdamp/tailcut.hpp"

using namespace fracdamp;
using std::numbers::pi;

namespace {

// Trigonometric polynomial sum_{|k| <= K} c_k exp(2 pi i k x / L) with
// conjugate-symmetric coefficients.
struct TrigPoly {
  double L;
  std::vector<std::complex<double>> c;  // index k + K
  int K;

  double operator()(double x) const {
    double s = 0.0;
    for (int k = -K; k <= K; ++k) s += (c[k + K] * std::exp(std::complex<double>(0, 2 * pi * k * x / L))).real();
    return s;
  }
};

TrigPoly random_poly(double L, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  TrigPoly p{L, std::vector<std::complex<double>>(2 * K + 1), K};
  p.c[K] = nd(rng);
  for (int k = 1; k <= K; ++k) {
    p.c[K + k] = {nd(rng), nd(rng)};
    p.c[K - k] = std::conj(p.c[K + k]);
  }
  return p;
}

}  // namespace

TEST_CASE("ramp and its mollification") {
  CHECK(ramp_K0(0.5) == 0.0);
  CHECK(ramp_K0(1.25) == doctest::Approx(0.25));
  CHECK(ramp_K0(3.0) == 1.0);
  const double d = 0.2;
  // Exact away from the kinks: the bump is even, the ramp locally affine.
  for (double s : {0.0, 0.79, 1.2, 1.5, 1.8, 2.21, 4.0})
    CHECK(mollified_ramp(s, d) == doctest::Approx(ramp_K0(s)).epsilon(1e-9).scale(1.0));
  double prev = 0.0;
  for (double s = 0.5; s <= 2.5; s += 0.001) {
    const double v = mollified_ramp(s, d);
    CHECK(v >= prev - 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
    const double h = 1e-5;
    CHECK(mollified_ramp_derivative(s, d) ==
          doctest::Approx((mollified_ramp(s + h, d) - mollified_ramp(s - h, d)) / (2 * h)).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("cut-off psi vanishes inside R and is one beyond 2R(1+delta)") {
  auto g = make_grid(1, 128.0, 1024);
  const double R = 8.0, d = 0.25;
  const CutoffPsi psi = build_psi(g, R, d);
  const auto p = psi.psi.values();
  const auto gr = psi.grad_norm.values();
  for (std::size_t n = 0; n < g->size(); ++n) {
    const double r = g->radius(n);
    if (r <= R) CHECK(p[n] == 0.0);
    if (r >= 2 * R * (1 + d)) CHECK(p[n] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[n] == doctest::Approx(psi(r)));
    CHECK(gr[n] <= 1.0 / R + 1e-12);
  }
  CHECK_THROWS_WITH(build_psi(g, 30.0, 0.25), "cutoff does not fit box");
}

TEST_CASE("cut-off scaling: R max|grad psi| and the Riesz norm are R independent") {
  auto g = make_grid(1, 256.0, 2048);
  std::vector<double> grad, riesz;
  for (double R : {8.0, 16.0, 32.0}) {
    const CutoffPsi psi = build_psi(g, R, 0.25);
    grad.push_back(R * lp_norm(psi.grad_norm, kInfinity));
    riesz.push_back(psi_riesz_norm_check(psi, 0.75, 2.0 / 0.75));
  }
  for (std::size_t i = 1; i < grad.size(); ++i) {
    CHECK(grad[i] == doctest::Approx(grad[0]).epsilon(0.1));
    CHECK(riesz[i] == doctest::Approx(riesz[0]).epsilon(0.25));
  }
}

TEST_CASE("commutator matches a brute-force Fourier convolution at M = 64") {
  const double L = 2 * pi * 3;
  const int M = 64, K = 15;  // products stay below M/2: alias-free
  auto g = make_grid(1, L, M);
  std::mt19937_64 rng(8);
  const TrigPoly A = random_poly(L, K, rng), B = random_poly(L, K, rng);
  const Field a = Field::from_function(g, [&](const auto& x) { return A(x[0]); });
  const Field b = Field::from_function(g, [&](const auto& x) { return B(x[0]); });
  for (double s : {0.3, 0.5, 0.9}) {
    auto lam = [&](int k) { return std::pow(2 * pi * std::abs(k) / L, s); };
    std::vector<std::complex<double>> C(4 * K + 1);
    for (int i = -K; i <= K; ++i)
      for (int j = -K; j <= K; ++j) {
        const auto ai = A.c[i + K], bj = B.c[j + K];
        C[i + j + 2 * K] += ai * bj * (lam(i + j) - lam(j) - lam(i));
      }
    const Field got = commutator_field(a, b, s);
    const auto gv = got.values();
    double worst = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < g->size(); ++n) {
      const double x = g->position(n)[0];
      double want = 0.0;
      for (int k = -2 * K; k <= 2 * K; ++k)
        want += (C[k + 2 * K] * std::exp(std::complex<double>(0, 2 * pi * k * x / L))).real();
      worst = std::max(worst, std::abs(gv[n] - want));
      scale = std::max(scale, std::abs(want));
    }
    CHECK(worst <= 1e-12 * scale);
  }
}

TEST_CASE("commutator vanishes against constants and is bilinear") {
  auto g = make_grid(1, 50.0, 256);
  std::mt19937_64 rng(1);
  const Field a = random_band_limited(g, g->nyquist() / 4, 1.0, rng);
  const Field b = random_band_limited(g, g->nyquist() / 4, 1.0, rng);
  const Field one = Field::from_function(g, [](const auto&) { return 3.0; });
  CHECK(lp_norm(commutator_field(one, b, 0.5), kInfinity) < 1e-12);
  const CommutatorExponents e{};
  const auto base = commutator_defect(a, b, e);
  const auto scaled = commutator_defect(3.0 * a, b, e);
  CHECK(scaled.defect_norm == doctest::Approx(3.0 * base.defect_norm).epsilon(1e-12));
  CHECK(scaled.ratio == doctest::Approx(base.ratio).epsilon(1e-12));
  CHECK(commutator_defect(a, b, {0.5, 2.0, kInfinity, 2.0, 0.0, 0.5}).ratio > 0.0);
}

TEST_CASE("commutator exponent validation lists every violation") {
  auto g = make_grid(1, 10.0, 32);
  const Field a(g);
  CHECK_THROWS_WITH(commutator_defect(a, a, {1.2, 2.0, 4.0, 4.0, 1.2, 0.0}), doctest::Contains("s must lie in (0,1)"));
  CHECK_THROWS_WITH(commutator_defect(a, a, {0.5, 2.0, 4.0, 4.0, 0.5, 0.5}), doctest::Contains("s = s1 + s2"));
  CHECK_THROWS_WITH(commutator_defect(a, a, {0.5, 2.0, 3.0, 4.0, 0.5, 0.0}), doctest::Contains("1/p = 1/p1 + 1/p2"));
  CHECK_THROWS_WITH(commutator_defect(a, a, {0.5, 2.0, kInfinity, 2.0, 0.5, 0.0}), doctest::Contains("p1 = inf"));
  CHECK(commutator_defect(a, a, {}).ratio == 0.0);
}

TEST_CASE("cut-off inequality terms and calibration") {
  auto g = make_grid(1, 128.0, 1024);
  const CutoffPsi psi8 = build_psi(g, 8.0, 0.25), psi16 = build_psi(g, 16.0, 0.25);
  const Field inside = compact_bump(g, 1.0, 4.0);
  const CutoffInequalityTerms t = cutoff_inequality_check(inside, psi8, 0.75, 2.0);
  CHECK(t.local < 1e-3 * sobolev_norm(inside, {.s = 1.0}));  // spectral gradient leaks slightly
  CHECK(t.far == doctest::Approx(std::pow(8.0, -0.375) * sobolev_norm(inside, {.s = 1.0})));
  CHECK(t.rhs == doctest::Approx(2.0 * (t.local + t.far)));
  CHECK(t.margin == doctest::Approx(t.rhs - t.lhs));
  CHECK(t.lhs > 0.0);  // the nonlocal operator leaks outside the support

  std::vector<Field> fields{inside, gaussian_bump(g, 1.0, 3.0, {20.0, 0, 0}), gaussian_bump(g, 0.5, 1.0, {-30.0, 0, 0})};
  std::vector<const CutoffPsi*> psis{&psi8, &psi16, &psi8};
  const double C = calibrate_cutoff_inequality(fields, psis, 0.75, 1.5);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto ti = cutoff_inequality_check(fields[i], *psis[i], 0.75, C);
    CHECK(ti.margin >= 0.0);
  }
  CHECK_THROWS(calibrate_cutoff_inequality(fields, std::span(psis).first(2), 0.75));
}

TEST_CASE("tail quantities") {
  auto g = make_grid(1, 64.0, 512);
  const State s = make_state(compact_bump(g, 1.0, 3.0), compact_bump(g, 0.5, 3.0));
  const double whole = tail_norm(s, 0.0, Nonlinearity::cubic());
  CHECK(whole > 0.1);
  CHECK(tail_norm(s, 5.0, Nonlinearity::cubic()) < 1e-2 * whole);
  const Field one = Field::from_function(g, [](const auto&) { return 1.0; });
  // cells with |x| > 10 on the box [-32, 32)
  CHECK(field_tail_l2(one, 10.0) == doctest::Approx(std::sqrt(64.0 - 20.0)).epsilon(0.01));
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const CutoffPsi psi = build_psi(g, 8.0, 0.25);
  CHECK(std::abs(tail_energy_H4(s, psi, m, {0.0})) < 1e-6);
  CHECK(tail_energy_H4(s, psi, m, {0.25}) > 0.0);
}

TEST_CASE("tail smallness experiment on compact data") {
  auto g = make_grid(1, 128.0, 512);
  const ModelParams m(0.75, Nonlinearity::cubic(), compact_bump(g, 1.0, 2.0));
  const State s0 = make_state(compact_bump(g, 1.0, 3.0), Field(g));
  const std::vector<double> radii{4.0, 8.0, 16.0};
  const TailExperiment ex = tail_smallness_experiment(s0, m, {.dt = 0.02}, radii, 2.0, 0.25, {0.25});
  REQUIRE(ex.rows.size() == 3);
  CHECK(ex.strictly_decreasing);
  for (const auto& r : ex.rows) CHECK(r.tail_norm <= r.predicted_bound * (1 + 1e-12));
  CHECK(ex.rows[0].f_tail == 0.0);
  CHECK(ex.fit_residual >= 0.0);
}
