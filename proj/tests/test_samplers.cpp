#include "bvn/samplers.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "bvn/inference.hpp"
#include "doctest.h"
#include "support/grid_oracle.hpp"
#include "support/stat_checks.hpp"

using namespace bvn;
using namespace bvn::test;

namespace {

const SuffStats kStats5(5, 0.14, 0.04, 2.052, 2.092, 0.628408);

SuffStats fixed_stats() { return kStats5; }

}  // namespace

TEST_CASE("constructive map: forced variates") {
  // z3 = 0 and chi-squared draws at their d.f. with r = 0 give rho* = 0
  const SuffStats st(9, 0, 0, 3.0, 5.0, 0.0);
  const ScaleVariates v{0.0, 8.0, 7.0};  // (a, b) = (1, 2)
  const ScaleParams sc = scale_from_variates(st, v);
  CHECK(sc.rho == 0.0);
  CHECK(sc.sigma1 == doctest::Approx(std::sqrt(3.0 / 8.0)).epsilon(1e-14));

  // r = 0, z2 = z3 = 0 forces mu2* = xbar2
  const SuffStats st2(4, 1.5, -2.5, 2.0, 3.0, 0.0);
  const auto [mu1, mu2] = mean_from_variates(st2, {0.0, 3.0, 2.0}, 0.7, 0.0);
  CHECK(mu2 == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(mu1 == doctest::Approx(1.5 + 0.7 / std::sqrt(3.0) *
                                          std::sqrt(2.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("degrees of freedom are validated") {
  RngStream rng(1);
  const SuffStats st = fixed_stats();
  CHECK_THROWS_AS(draw_scale_variates(5, 5.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(constructive_scale_draw(st, 1.0, 6.0, rng),
                  std::invalid_argument);
}

TEST_CASE("eta draws obey the gamma marginals") {
  const SuffStats st = fixed_stats();
  const double pairs[4][2] = {{1, 0}, {2, 1}, {1, 2}, {1, 1}};
  int seed = 900;
  for (const auto& ab : pairs) {
    RngStream rng(static_cast<std::uint64_t>(seed++));
    const long n_draws = 100000;
    std::vector<double> eta1_sq(n_draws), eta2_sq(n_draws);
    for (long i = 0; i < n_draws; ++i) {
      const EtaParams e = constructive_eta_draw(st, ab[0], ab[1], rng);
      eta1_sq[static_cast<std::size_t>(i)] = e.eta1 * e.eta1;
      eta2_sq[static_cast<std::size_t>(i)] = e.eta2 * e.eta2;
    }
    const double n = static_cast<double>(st.n);
    const boost::math::gamma_distribution<double> g1(0.5 * (n - ab[0]),
                                                     2.0 / st.s11);
    const boost::math::gamma_distribution<double> g2(
        0.5 * (n - ab[1]), 2.0 / (st.s22 * (1.0 - st.r * st.r)));
    CAPTURE(ab[0]);
    CAPTURE(ab[1]);
    CHECK(ks_statistic(eta1_sq, [&](double x) {
            return boost::math::cdf(g1, x);
          }) < ks_critical(static_cast<std::size_t>(n_draws)));
    CHECK(ks_statistic(eta2_sq, [&](double x) {
            return boost::math::cdf(g2, x);
          }) < ks_critical(static_cast<std::size_t>(n_draws)));
  }
}

TEST_CASE("eta3 given (eta1, eta2) is the stated conditional normal") {
  const SuffStats st = fixed_stats();
  RngStream rng(33);
  const long n_draws = 100000;
  std::vector<double> resid(n_draws);
  for (long i = 0; i < n_draws; ++i) {
    const EtaParams e = constructive_eta_draw(st, 1.0, 2.0, rng);
    const double cond_mean = -e.eta2 * st.r * std::sqrt(st.s22 / st.s11);
    resid[static_cast<std::size_t>(i)] =
        (e.eta3 - cond_mean) * std::sqrt(st.s11);
  }
  CHECK(ks_statistic(resid, normal_cdf) <
        ks_critical(static_cast<std::size_t>(n_draws)));
}

TEST_CASE("scale draw equals the eta route exactly") {
  const SuffStats st = fixed_stats();
  RngStream rng(44);
  for (int i = 0; i < 200; ++i) {
    const ScaleVariates v = draw_scale_variates(st.n, 1.0, 2.0, rng);
    const ScaleParams direct = scale_from_variates(st, v);
    const ScaleParams via_eta = sigma_from_eta(eta_from_variates(st, v));
    CHECK(direct.sigma1 == doctest::Approx(via_eta.sigma1).epsilon(1e-12));
    CHECK(direct.sigma2 == doctest::Approx(via_eta.sigma2).epsilon(1e-12));
    CHECK(direct.rho == doctest::Approx(via_eta.rho).epsilon(1e-12));
  }
}

TEST_CASE("rho draws under the right-Haar prior match the marginal recipe") {
  const SuffStats st = fixed_stats();
  const long n_draws = 100000;
  RngStream a(55);
  std::vector<double> joint(n_draws);
  for (long i = 0; i < n_draws; ++i)
    joint[static_cast<std::size_t>(i)] =
        constructive_scale_draw(st, 1.0, 2.0, a).rho;
  RngStream b(56);
  const auto marginal = marginal_constructive_sample(
      ParamFn::Tag::Rho, st, PriorSpec::right_haar(), n_draws, b);
  CHECK(ks_statistic_two(joint, marginal) <
        ks_critical_two(joint.size(), marginal.size()));
}

TEST_CASE("mean draws match the marginal recipes") {
  const SuffStats st = fixed_stats();
  const long n_draws = 100000;

  // mu1 under any pi_{1b}: same law as the closed-form row
  RngStream a(57);
  std::vector<double> mu1(n_draws);
  for (long i = 0; i < n_draws; ++i)
    mu1[static_cast<std::size_t>(i)] = constructive_draw(st, 1.0, 2.0, a).mu1;
  RngStream b(58);
  const auto mu1_row = marginal_constructive_sample(
      ParamFn::Tag::Mu1, st, PriorSpec::right_haar(), n_draws, b);
  CHECK(ks_statistic_two(mu1, mu1_row) <
        ks_critical_two(mu1.size(), mu1_row.size()));

  // mu2 under jeffreys = pi_10
  RngStream c(59);
  std::vector<double> mu2(n_draws);
  for (long i = 0; i < n_draws; ++i)
    mu2[static_cast<std::size_t>(i)] = constructive_draw(st, 1.0, 0.0, c).mu2;
  RngStream d(60);
  const auto mu2_row = marginal_constructive_sample(
      ParamFn::Tag::Mu2, st, PriorSpec::jeffreys(), n_draws, d);
  CHECK(ks_statistic_two(mu2, mu2_row) <
        ks_critical_two(mu2.size(), mu2_row.size()));
}

TEST_CASE("mean_given_scale_draw concentrates at xbar as n grows") {
  const long n = 50;
  const SuffStats st(n, 2.0, -1.0, 30.0, 45.0, 0.3);
  const ScaleParams sc(1.4, 0.9, 0.0);
  RngStream rng(61);
  const long n_draws = 100000;
  std::vector<double> m1(n_draws), m2(n_draws);
  for (long i = 0; i < n_draws; ++i) {
    const auto [a, b] = mean_given_scale_draw(st, sc, rng);
    m1[static_cast<std::size_t>(i)] = a;
    m2[static_cast<std::size_t>(i)] = b;
  }
  CHECK(variance_of(m1) ==
        doctest::Approx(1.4 * 1.4 / n).epsilon(0.05));
  CHECK(variance_of(m2) ==
        doctest::Approx(0.9 * 0.9 / n).epsilon(0.05));
  CHECK(std::abs(correlation_of(m1, m2)) < 0.02);

  RngStream r1(62), r2(62);
  CHECK(mean_given_scale_draw(st, sc, r1) == mean_given_scale_draw(st, sc, r2));
}

TEST_CASE("accept-reject: empirical acceptance tracks the closed form") {
  // posterior of rho concentrates at r for large n, so the long-run
  // acceptance approaches the pointwise rate at rho = r
  const long n = 10000;
  const SuffStats st(n, 0.0, 0.0, n - 1.0, n - 1.0, 0.80);
  RngStream rng(63);
  const double rate =
      empirical_acceptance_rate(PriorSpec::r_rho(), st, 20000, rng);
  CHECK(std::abs(rate - 0.6000) < 0.02);

  RngStream rng2(64);
  const AcceptRejectResult ar = accept_reject_draw(PriorSpec::r_rho(), st, rng2);
  CHECK(ar.proposals_used >= 1);
  CHECK(std::abs(ar.scale.rho - 0.8) < 0.05);
}

TEST_CASE("accept-reject law matches the grid-integration posterior") {
  const SuffStats st = fixed_stats();
  RngStream rng(65);
  const long n_draws = 20000;
  std::vector<double> rho(n_draws);
  for (long i = 0; i < n_draws; ++i)
    rho[static_cast<std::size_t>(i)] =
        accept_reject_draw(PriorSpec::r_rho(), st, rng).scale.rho;

  std::vector<double> grid;
  for (double v = -0.995; v <= 0.9951; v += 0.005) grid.push_back(v);
  const OracleData od{st.n, st.s11, st.s22, st.r};
  const auto oracle_cdf = rho_posterior_cdf_grid(od, OraclePrior::Rrho, grid, 161);
  const auto emp_cdf = empirical_cdf_at(rho, grid);
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    sup = std::max(sup, std::abs(oracle_cdf[i] - emp_cdf[i]));
  CHECK(sup < 0.02);  // acceptance suite runs the tight version
}

TEST_CASE("independence MH with the proposal as target accepts everything") {
  const SuffStats st = fixed_stats();
  RngStream rng(66);
  const auto [states, diag] =
      mh_scale_chain(PriorSpec::ind_jeffreys(), st, 500, 100, rng);
  CHECK(states.size() == 400);
  CHECK(diag.acceptance_rate == 1.0);
  CHECK(diag.chain_length == 500);
  CHECK(diag.burn_in == 100);
}

TEST_CASE("MH diagnostics are exact counts and the chain is sane") {
  const SuffStats st = fixed_stats();
  RngStream rng(67);
  const long steps = 4000;
  const auto [states, diag] =
      mh_scale_chain(PriorSpec::r_lambda(), st, steps, 0, rng);
  const double accepted = diag.acceptance_rate * static_cast<double>(steps);
  CHECK(std::abs(accepted - std::round(accepted)) < 1e-9);
  CHECK(diag.acceptance_rate > 0.0);
  CHECK(diag.acceptance_rate < 1.0);

  // symmetric data: the r-lambda posterior of sigma2/sigma1 has median ~1
  const SuffStats sym(40, 0.0, 0.0, 39.0, 39.0, 0.0);
  RngStream rng2(68);
  const auto [chain, d2] = mh_scale_chain(PriorSpec::r_lambda(), sym, 21000, 1000, rng2);
  std::vector<double> theta7;
  theta7.reserve(chain.size());
  for (const ScaleParams& sc : chain) theta7.push_back(sc.sigma2 / sc.sigma1);
  const double med = empirical_quantile(theta7, 0.5);
  CHECK(std::abs(med - 1.0) < 0.05);

  CHECK_THROWS_AS(mh_scale_chain(PriorSpec::r_lambda(), st, 100, 100, rng),
                  std::invalid_argument);
}

TEST_CASE("posterior_sample: dispatch, determinism, edge cases") {
  const SuffStats st = fixed_stats();
  RngStream rng(69);
  CHECK(posterior_sample(PriorSpec::right_haar(), st, 0, rng).empty());

  RngStream a(70), b(70);
  const auto da = posterior_sample(PriorSpec::r_rho(), st, 200, a);
  const auto db = posterior_sample(PriorSpec::r_rho(), st, 200, b);
  for (std::size_t i = 0; i < da.size(); ++i) {
    CHECK(da[i].rho == db[i].rho);
    CHECK(da[i].mu1 == db[i].mu1);
  }

  // the ind-jeffreys spec takes the constructive (2, 1) path exactly
  RngStream c(71), d(71);
  const auto dc = posterior_sample(PriorSpec::ind_jeffreys(), st, 100, c);
  for (std::size_t i = 0; i < dc.size(); ++i) {
    const PosteriorDraw ref = constructive_draw(st, 2.0, 1.0, d);
    CHECK(dc[i].sigma1 == ref.sigma1);
    CHECK(dc[i].rho == ref.rho);
    CHECK(dc[i].mu2 == ref.mu2);
  }

  SampleRunInfo info;
  RngStream e(72);
  const auto dr = posterior_sample(PriorSpec::r_lambda(), st, 50, e, {.burn_in = 20}, &info);
  CHECK(dr.size() == 50);
  CHECK(info.mcmc_used);
  CHECK(info.mcmc.chain_length == 70);
}

TEST_CASE("sample_param_posterior matches the full-draw pushforward") {
  const SuffStats st = fixed_stats();

  // identical consumption path for a mean parameter under the AB family
  RngStream a(73), b(73);
  std::vector<double> fast;
  sample_param_posterior(PriorSpec::right_haar(), st, ParamFn::Tag::Theta5, 500,
                         a, fast);
  const auto full = posterior_sample(PriorSpec::right_haar(), st, 500, b);
  const auto pushed = pushforward(full, ParamFn::Tag::Theta5);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == pushed[i]);

  // law equality for a scale-only parameter under accept-reject
  RngStream c(74), d(75);
  std::vector<double> fast_rho;
  sample_param_posterior(PriorSpec::r_rho(), st, ParamFn::Tag::Rho, 50000, c,
                         fast_rho);
  const auto full_rr = posterior_sample(PriorSpec::r_rho(), st, 50000, d);
  const auto pushed_rho = pushforward(full_rr, ParamFn::Tag::Rho);
  CHECK(ks_statistic_two(fast_rho, pushed_rho) <
        ks_critical_two(fast_rho.size(), pushed_rho.size()));
}
