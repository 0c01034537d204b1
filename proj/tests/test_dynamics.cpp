#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fracdamp/dynamics.hpp"
#include "fracdamp/energy.hpp"
#include "fracdamp/errors.hpp"
#include "fracdamp/mollifier.hpp"
#include "fracdamp/random_fields.hpp"
#include "fracdamp/spectral.hpp"
#include "oracles.hpp"

using namespace fracdamp;

namespace {

double state_gap(const State& a, const State& b) {
  const State d = difference(a, b);
  return std::sqrt(std::pow(sobolev_norm(d.u, {}), 2) + std::pow(sobolev_norm(d.v, {}), 2));
}

double state_size(const State& a) {
  return std::sqrt(std::pow(sobolev_norm(a.u, {}), 2) + std::pow(sobolev_norm(a.v, {}), 2));
}

State random_state(GridPtr g, double kmax, std::mt19937_64& rng) {
  return make_state(random_band_limited(g, kmax, 1.0, rng), random_band_limited(g, kmax, 1.0, rng));
}

}  // namespace

TEST_CASE("mode propagator matches the closed-form exponential in every branch") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> xs(0.0, 12.0), hs(0.001, 1.0), as(0.55, 0.95);
  int checked = 0;
  while (checked < 200) {
    const double xi = xs(rng), h = hs(rng), alpha = as(rng);
    const double a = mode_damping(xi, alpha), b = mode_stiffness(xi);
    if (std::abs(a * a - 4 * b) < 1e-3 * a * a) continue;  // oracle degenerate at a double root
    const auto P = mode_propagator(a, b, h);
    const auto E = oracle::exp2x2(a, b, h);
    const double scale = std::abs(E[0]) + std::abs(E[1]) + std::abs(E[2]) + std::abs(E[3]);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(P.E[i] - E[i]) <= 1e-12 * scale);
    ++checked;
  }
}

TEST_CASE("phi columns equal the Duhamel integrals of frozen and linear forcing") {
  for (double xi : {0.0, 0.3, 2.0, 7.5}) {
    for (double h : {0.005, 0.05, 0.4}) {
      const double a = mode_damping(xi, 0.75), b = mode_stiffness(xi);
      const auto P = mode_propagator(a, b, h);
      const auto q1 = oracle::duhamel_column(a, b, h, [](double) { return 1.0; });
      const auto q2 = oracle::duhamel_column(a, b, h, [h](double s) { return s / h; });
      for (int i = 0; i < 2; ++i) {
        CHECK(P.phi1[i] == doctest::Approx(q1[i]).epsilon(1e-10).scale(std::abs(q1[0]) + std::abs(q1[1])));
        CHECK(P.phi2[i] == doctest::Approx(q2[i]).epsilon(1e-10).scale(std::abs(q2[0]) + std::abs(q2[1])));
      }
    }
  }
}

TEST_CASE("linear semigroup step on random modes and the semigroup property") {
  auto g = make_grid(1, 40.0, 256);
  const ModelParams m(g, 0.7, Nonlinearity::none());
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> slot(1, 127);
  std::normal_distribution<double> nd;
  State s = zero_state(g);
  std::vector<int> picked;
  while (picked.size() < 50) {
    const int j = slot(rng);
    if (std::find(picked.begin(), picked.end(), j) != picked.end()) continue;
    picked.push_back(j);
    const cplx u{nd(rng), nd(rng)}, v{nd(rng), nd(rng)};
    s.u.data()[j] = u;
    s.u.data()[256 - j] = std::conj(u);
    s.v.data()[j] = v;
    s.v.data()[256 - j] = std::conj(v);
  }
  for (double t : {0.01, 0.37, 1.5}) {
    const State r = linear_semigroup_step(s, m, t);
    for (int j : picked) {
      const double xi = g->xi_norm()[j];
      const auto E = oracle::exp2x2(mode_damping(xi, 0.7), mode_stiffness(xi), t);
      const cplx u0 = s.u.data()[j], v0 = s.v.data()[j];
      const cplx ue = E[0] * u0 + E[1] * v0, ve = E[2] * u0 + E[3] * v0;
      const double size = std::sqrt(std::norm(ue) + std::norm(ve));
      CHECK(std::sqrt(std::norm(r.u.data()[j] - ue) + std::norm(r.v.data()[j] - ve)) <= 1e-10 * size);
    }
  }
  const State full = random_state(g, g->nyquist(), rng);
  for (auto [t1, t2] : {std::pair{0.2, 0.3}, std::pair{1.0, 2.5}, std::pair{0.001, 0.7}}) {
    const State two = linear_semigroup_step(linear_semigroup_step(full, m, t1), m, t2);
    const State one = linear_semigroup_step(full, m, t1 + t2);
    CHECK(state_gap(two, one) <= 1e-10 * state_size(one));
  }
}

TEST_CASE("ETD reproduces the exact affine solution with constant forcing") {
  auto g = make_grid(1, 30.0, 256);
  const Field f = gaussian_bump(g, 1.0, 2.0);
  const ModelParams m(0.8, Nonlinearity::none(), f);
  std::mt19937_64 rng(2);
  const State s0 = random_state(g, 5.0, rng);
  const Field ustar = bessel_power(f, -2.0);  // (I - Delta) u* = f
  const State star = make_state(ustar, Field(g));
  const double T = 3.0;
  const Trajectory tr = integrate(s0, m, {.dt = 0.05}, T, {.stride = 1000});
  State expect = linear_semigroup_step(difference(s0, star), m, T);
  expect.u += to_spectral(ustar);
  CHECK(state_gap(tr.back(), expect) <= 1e-11 * state_size(expect));
  // the equilibrium is a fixed point
  const Trajectory rest = integrate(star, m, {.dt = 0.1}, 5.0, {.stride = 1000});
  CHECK(state_gap(rest.back(), star) <= 1e-12 * state_size(star));
}

TEST_CASE("ETD2 converges at second order and agrees with the RK4 reference") {
  auto g = make_grid(1, 40.0, 256);
  const ModelParams m(0.75, Nonlinearity::cubic(), gaussian_bump(g, 0.3, 3.0));
  const State s0 = make_state(gaussian_bump(g, 1.2, 2.0), gaussian_bump(g, 0.5, 2.0));
  const double T = 2.0;
  const ObserverSpec last{.stride = 1 << 20};
  const State ref = integrate(s0, m, {.dt = 0.001, .scheme = Scheme::reference_rk4}, T, last).back();
  std::vector<double> err;
  for (double dt : {0.04, 0.02, 0.01}) err.push_back(state_gap(integrate(s0, m, {.dt = dt}, T, last).back(), ref));
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.15));
  const State rk = integrate(s0, m, {.dt = 0.002, .scheme = Scheme::reference_rk4}, T, last).back();
  CHECK(state_gap(rk, ref) <= 1e-9 * state_size(ref));
}

TEST_CASE("single-mode energy decays at twice the slow eigenvalue") {
  // Overdamped mode: kappa = -2 r1 with r1 = -b / (mu + sqrt(mu^2 - b)).
  const double L = 2 * std::numbers::pi;
  auto g = make_grid(1, L, 64);
  const int k = 9;
  const double alpha = 0.9;
  const double a = mode_damping(k, alpha), b = mode_stiffness(k);
  const double mu = a / 2;
  REQUIRE(mu * mu > b);
  const double kappa = 2.0 * b / (mu + std::sqrt(mu * mu - b));
  const ModelParams m(g, alpha, Nonlinearity::none());
  const State s0 = make_state(cosine_mode(g, {k, 0, 0}, 1.0), Field(g));
  EnergySeries es;
  integrate(s0, m, {.dt = 0.01}, 6.0, {.stride = 10, .store = false, .callback = energy_recorder(m, es)});
  std::vector<double> t, e;
  for (std::size_t i = 0; i < es.t.size(); ++i)
    if (es.t[i] >= 1.0) {
      t.push_back(es.t[i]);
      e.push_back(es.E[i]);
    }
  const DecayFit fit = decay_fit(t, e);
  CHECK(fit.kappa == doctest::Approx(kappa).epsilon(1e-3));
}

TEST_CASE("integration bookkeeping") {
  auto g = make_grid(1, 20.0, 64);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const State s0 = make_state(gaussian_bump(g, 1.0, 2.0), Field(g));
  const Trajectory tr = integrate(s0, m, {.dt = 0.1}, 1.0, {.stride = 3});
  REQUIRE(tr.states.size() == 5);  // steps 0, 3, 6, 9, 10
  CHECK(tr.states[1].t == doctest::Approx(0.3));
  CHECK(tr.back().t == doctest::Approx(1.0));
  CHECK(tr.back().u.is_spectral());
  CHECK_THROWS_WITH(integrate(s0, m, {.dt = 0.3}, 1.0), "T must be an integer multiple of dt");
  CHECK_THROWS_WITH(integrate(s0, m, {.dt = 5.0}, 10.0), "integrator failure: dt = 5 exceeds stability bound 0.5");
  CHECK(stability_bound(m, Scheme::reference_rk4) < 0.5);
  const ModelParams bad(g, 1.2, Nonlinearity::cubic());
  CHECK_THROWS_WITH(Integrator(bad, {}), "dissipative index out of (1/2,1)");
}

TEST_CASE("blow-up is detected") {
  auto g = make_grid(1, 20.0, 64);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const State huge = make_state(gaussian_bump(g, 1e12, 2.0), Field(g));
  CHECK_THROWS_AS(integrate(huge, m, {.dt = 0.01}, 0.1), StateBlowUp);
}

TEST_CASE("auxiliary problem stays inside the S_l band") {
  auto g = make_grid(1, 50.0, 512);
  const ModelParams m(0.75, Nonlinearity::cubic(), gaussian_bump(g, 0.5, 1.0));
  const State s0 = make_state(gaussian_bump(g, 1.0, 0.5), gaussian_bump(g, 1.0, 0.5));
  const Trajectory tr = integrate_auxiliary(s0, m, 2, {.dt = 0.01}, 1.0, {.stride = 50});
  for (const auto& s : tr.states) {
    const auto xi = g->xi_norm();
    for (std::size_t n = 0; n < xi.size(); ++n)
      if (xi[n] > 8.0) {
        CHECK(s.u.data()[n] == cplx{});
        CHECK(s.v.data()[n] == cplx{});
      }
  }
}

TEST_CASE("phase-space norms on a cosine state") {
  const double L = 10.0;
  auto g = make_grid(1, L, 64);
  const double xi = 2 * std::numbers::pi * 3 / L, w = 1 + xi * xi, c = std::sqrt(L / 2);
  const State s = make_state(cosine_mode(g, {3, 0, 0}, 2.0), cosine_mode(g, {3, 0, 0}, 1.0));
  const double alpha = 0.6;
  CHECK(norm_X_alpha(s, alpha) == doctest::Approx(c * std::sqrt(4 * std::pow(w, 2 * alpha + 1) + std::pow(w, 2 * alpha))));
  CHECK(norm_H_alpha(s, alpha) == doctest::Approx(c * std::sqrt(4 * std::pow(w, 1 + alpha) + std::pow(w, alpha))));
  CHECK(norm_H_minus(s, 0.5) == doctest::Approx(c * std::sqrt(4 * std::pow(w, 0.5) + std::pow(w, -0.5))));
  CHECK(norm_H(s, Nonlinearity::cubic()) == doctest::Approx(c * std::sqrt(4 * w + 1)));
}

TEST_CASE("trajectory CSV round trip is exact") {
  auto g = make_grid(2, 8.0, 8);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  std::mt19937_64 rng(4);
  const Trajectory tr = integrate(random_state(g, 2.0, rng), m, {.dt = 0.05}, 0.2, {.stride = 2});
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  CHECK(ss.str().rfind("# schema=fracdamp.trajectory.v1", 0) == 0);
  const Trajectory back = read_trajectory_csv(ss);
  REQUIRE(back.states.size() == tr.states.size());
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    CHECK(back.states[i].t == tr.states[i].t);
    CHECK(state_gap(back.states[i], tr.states[i]) == 0.0);
  }
  std::stringstream bad("t,mode\n1,2\n");
  CHECK_THROWS(read_trajectory_csv(bad));
}

TEST_CASE("Picard map contracts at small T and its fixed point is the integrator solution") {
  auto g = make_grid(1, 50.0, 256);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const State s0 = make_state(gaussian_bump(g, 1.0, 2.0), gaussian_bump(g, 0.5, 2.0));
  const PicardReport r = picard_contraction_demo(s0, m, 3, 0.05, {.steps = 50, .pairs = 3});
  CHECK(r.contraction_ratio < 1.0);
  CHECK(r.converged);
  CHECK(r.status == "contraction");
  CHECK(r.deviation_from_integrator < 1e-8);
  REQUIRE(r.iterate_increments.size() >= 2);
  CHECK(r.iterate_increments[1] < r.iterate_increments[0]);
}
