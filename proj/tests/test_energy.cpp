#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fracdamp/energy.hpp"
#include "fracdamp/errors.hpp"
#include "fracdamp/random_fields.hpp"
#include "fracdamp/spectral.hpp"

using namespace fracdamp;

TEST_CASE("energy, dissipation and H on a cosine state") {
  const double L = 10.0;
  auto g = make_grid(1, L, 64);
  const double xi = 2 * std::numbers::pi * 2 / L, w = 1 + xi * xi, c2 = L / 2;
  const State s = make_state(cosine_mode(g, {2, 0, 0}, 1.5), cosine_mode(g, {2, 0, 0}, -0.5));
  const ModelParams m(g, 0.75, Nonlinearity::none());
  const double E = 0.5 * c2 * (0.25 + w * 2.25);
  CHECK(total_energy(s, m) == doctest::Approx(E));
  CHECK(dissipation(s, 0.75) == doctest::Approx(c2 * 0.25 * (std::pow(xi, 1.5) + 1)));
  const double eps = 0.125;
  const double H = E + eps * (c2 * 1.5 * -0.5 + 0.5 * c2 * 2.25 * (std::pow(xi, 1.5) + 1));
  CHECK(lyapunov_H(s, m, {eps}) == doctest::Approx(H));
  CHECK(functional_H3(s.u, 0.75) == doctest::Approx(c2 * 2.25 * (std::pow(xi, 3.5) + xi * xi + 1)));
  CHECK(functional_H2(s, 0.75, 0.5, 0.0) == doctest::Approx(std::pow(norm_H_minus(s, 0.5), 2)));
}

TEST_CASE("energy equality residual converges at second order") {
  auto g = make_grid(1, 100.0, 1024);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const State s0 = make_state(gaussian_bump(g, 1.0, 2.0), gaussian_bump(g, 0.5, 2.0));
  double prev = 0.0;
  for (double dt : {0.04, 0.02}) {
    EnergySeries es;
    integrate(s0, m, {.dt = dt}, 4.0, {.stride = 1, .store = false, .callback = energy_recorder(m, es)});
    const auto r = energy_equality_residual(es);
    const double worst = *std::max_element(r.begin(), r.end());
    CHECK(worst < 1e-2);
    if (prev > 0.0) CHECK(prev / worst == doctest::Approx(4.0).epsilon(0.2));
    prev = worst;
    for (std::size_t i = 1; i < es.E.size(); ++i) CHECK(es.E[i] <= es.E[i - 1] + 1e-6 * es.E[0]);
  }
}

TEST_CASE("dH/dt = -Phi along trajectories") {
  auto g = make_grid(1, 60.0, 512);
  const ModelParams m(0.7, Nonlinearity{3.0, 0.2, 1.0, NonlinearityForm::power}, gaussian_bump(g, 0.4, 3.0));
  const LyapunovParams lp{0.25};
  const State s0 = make_state(gaussian_bump(g, 1.0, 2.0), gaussian_bump(g, -0.3, 2.0));
  std::vector<double> t, H, P;
  integrate(s0, m, {.dt = 0.005}, 3.0,
            {.stride = 1, .store = false, .callback = [&](const State& s) {
               t.push_back(s.t);
               H.push_back(lyapunov_H(s, m, lp));
               P.push_back(dissipation_Phi(s, m, lp));
             }});
  double integral = 0.0, worst = 0.0, scale = 0.0;
  for (double h : H) scale = std::max(scale, std::abs(h));
  for (std::size_t i = 1; i < t.size(); ++i) {
    integral += 0.5 * (t[i] - t[i - 1]) * (P[i] + P[i - 1]);
    worst = std::max(worst, std::abs(H[i] + integral - H[0]) / scale);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("calibrated epsilon satisfies both inequalities on fresh probes") {
  auto g = make_grid(1, 40.0, 256);
  const ModelParams m(0.75, Nonlinearity{3.0, 0.3, 1.0, NonlinearityForm::power}, gaussian_bump(g, 0.5, 2.0));
  const LyapunovParams lp = calibrate_epsilon(m, 7, 60);
  const double k = -std::log2(lp.epsilon);
  CHECK(k == std::round(k));
  CHECK(lp.epsilon <= 0.5);
  std::mt19937_64 rng(99);
  const double f2 = std::pow(sobolev_norm(m.forcing, {}), 2);
  for (int i = 0; i < 20; ++i) {
    const State s = make_state(random_band_limited(g, 3.0, 1.0, rng), random_band_limited(g, 3.0, 0.7, rng));
    const double H = lyapunov_H(s, m, lp);
    const double n2 = std::pow(sobolev_norm(s.v, {}), 2) + std::pow(sobolev_norm(s.u, {.s = 1.0}), 2);
    CHECK(H + 2 * f2 >= 0.25 * (1 - m.nl.c0) * n2);
    CHECK(dissipation_Phi(s, m, lp) - lp.epsilon * H >= -1e-12 * n2);
  }
  CHECK_THROWS(calibrate_epsilon(m, 1, 0));
}

TEST_CASE("decay fit recovers a synthetic exponential") {
  std::vector<double> t, y;
  for (int i = 0; i < 200; ++i) {
    t.push_back(0.05 * i + 1.0);
    y.push_back(2.0 * std::exp(-0.7 * t.back()) + 0.1);
  }
  const DecayFit f = decay_fit(t, y);
  CHECK(f.kappa == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(f.floor == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(f.residual < 1e-8);

  std::vector<double> pure;
  for (double s : t) pure.push_back(3.0 * std::exp(-1.3 * s));
  const DecayFit p = decay_fit(t, pure);
  CHECK(p.kappa == doctest::Approx(1.3).epsilon(1e-6));
  CHECK(p.floor == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("decay fit rejects unusable series") {
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> up{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK_THROWS_AS(decay_fit(t, up), FitFailed);
  std::vector<double> shortv{3, 2, 1};
  CHECK_THROWS_AS(decay_fit(std::span(t).first(3), shortv), FitFailed);
  std::vector<double> neg{1, 0.5, 0.2, 0.1, 0, -1, -1, -1, -1, -1};
  CHECK_THROWS_AS(decay_fit(t, neg), FitFailed);
  std::vector<double> flat_t{0, 1, 1, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> down{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  CHECK_THROWS_AS(decay_fit(flat_t, down), FitFailed);
}

TEST_CASE("reconstructed u_tt matches a centred difference of u_t") {
  auto g = make_grid(1, 40.0, 256);
  const ModelParams m(0.75, Nonlinearity::cubic(), gaussian_bump(g, 0.3, 2.0));
  const State s0 = make_state(gaussian_bump(g, 1.0, 2.0), gaussian_bump(g, 0.2, 1.0));
  const double h = 1e-3;
  const Trajectory nb = integrate(s0, m, {.dt = h}, 0.5 - h, {.stride = 1 << 20});
  const Trajectory na = integrate(nb.back(), m, {.dt = h}, 2 * h, {.stride = 1});
  const Field fd = (0.5 / h) * (to_spectral(na.states[2].v) - to_spectral(na.states[0].v));
  const Field utt = reconstruct_utt(na.states[1], m);
  CHECK(sobolev_norm(utt - fd, {.s = -1.0}) < 1e-4 * sobolev_norm(utt, {.s = -1.0}));
}

TEST_CASE("smoothing report on identical runs has unit spread") {
  auto g = make_grid(1, 32.0, 128);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  State s0 = make_state(Field(g), rough_field(g, 0.2, 1.0, 3));
  const Trajectory tr = integrate(s0, m, {.dt = 1.0 / 256}, 1.0, {.stride = 4});
  const SmoothingRun run{&tr, &m};
  const std::vector<SmoothingRun> runs{run, run};
  const std::vector<double> times{1.0 / 64, 1.0 / 8, 1.0};
  const SmoothingReport rep = smoothing_report(runs, times, times.front());
  CHECK(rep.resolution_spread == 1.0);
  CHECK(rep.rows.size() == 6);
  CHECK(rep.c_alpha == doctest::Approx(std::pow(3.0, 3.0)));
  const std::vector<double> off{2.0};
  CHECK_THROWS(smoothing_report(runs, off));
}

TEST_CASE("energy report columns line up with the header") {
  auto g = make_grid(1, 32.0, 128);
  const ModelParams m(g, 0.75, Nonlinearity::cubic());
  const State s = make_state(gaussian_bump(g, 1.0, 2.0), Field(g));
  const EnergyReport r = energy_report(s, m, {0.25});
  const std::string h = energy_report_header(), row = energy_report_row(r);
  CHECK(std::count(h.begin(), h.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(r.E == doctest::Approx(total_energy(s, m)));
  CHECK(r.H4 == 0.0);
}
