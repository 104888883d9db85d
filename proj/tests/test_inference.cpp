#include "bvn/inference.hpp"

#include <cmath>

#include "doctest.h"
#include "support/stat_checks.hpp"

using namespace bvn;
using namespace bvn::test;

namespace {

const SuffStats kStats5(5, 0.14, 0.04, 2.052, 2.092, 0.628408);

}  // namespace

TEST_CASE("empirical quantile: order-statistic convention") {
  const std::vector<double> s = {5, 1, 4, 2, 3};
  CHECK(empirical_quantile(s, 0.5) == 3.0);
  CHECK(empirical_quantile(s, 0.999) == 5.0);
  std::vector<double> big(100);
  for (int i = 0; i < 100; ++i) big[static_cast<std::size_t>(i)] = i + 1;
  CHECK(empirical_quantile(big, 0.95) == 95.0);
  CHECK(empirical_quantile(big, 0.05) == 5.0);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_quantile(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(empirical_quantile(s, 1.0), std::invalid_argument);
}

TEST_CASE("empirical quantile agrees with the normal quantile oracle") {
  RngStream rng(81);
  std::vector<double> draws(1000000);
  for (double& d : draws) d = rng.normal();
  CHECK(std::abs(empirical_quantile(draws, 0.95) - 1.6448536269514722) < 0.01);
}

TEST_CASE("quantiles commute with monotone maps and positive scalings") {
  RngStream rng(82);
  std::vector<double> s(777);
  for (double& x : s) x = rng.normal() * 2.0;
  for (const double q : {0.05, 0.31, 0.5, 0.9, 0.95}) {
    std::vector<double> mapped(s.size()), scaled(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      mapped[i] = std::tanh(s[i]);
      scaled[i] = 3.25 * s[i];
    }
    // exact equality: same element selected, then transformed
    CHECK(empirical_quantile(mapped, q) == std::tanh(empirical_quantile(s, q)));
    CHECK(empirical_quantile(scaled, q) == 3.25 * empirical_quantile(s, q));
  }
}

TEST_CASE("rho quantile equals psi of the Y quantile") {
  RngStream rng(83);
  std::vector<double> y(20001);
  for (double& v : y) v = rng.normal() + 0.7;
  std::vector<double> rho(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    rho[i] = y[i] / std::sqrt(1.0 + y[i] * y[i]);
  for (const double q : {0.05, 0.5, 0.95}) {
    const double yq = empirical_quantile(y, q);
    CHECK(empirical_quantile(rho, q) == yq / std::sqrt(1.0 + yq * yq));
  }
}

TEST_CASE("credible intervals: endpoints and sides") {
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[static_cast<std::size_t>(i)] = i + 1;
  const ParamFn p(ParamFn::Tag::Rho);

  const auto up = credible_interval(s, p, 0.95, IntervalSide::UpperOpen);
  CHECK(up.upper == 95.0);
  CHECK(std::isinf(up.lower));

  const auto lo = credible_interval(s, p, 0.95, IntervalSide::LowerOpen);
  CHECK(lo.lower == 5.0);
  CHECK(std::isinf(lo.upper));

  const auto two = credible_interval(s, p, 0.90, IntervalSide::TwoSided);
  CHECK(two.lower == empirical_quantile(s, 0.05));
  CHECK(two.upper == empirical_quantile(s, 0.95));
  CHECK(two.lower <= two.upper);

  CHECK_THROWS_AS(credible_interval(s, p, 1.5, IntervalSide::TwoSided),
                  std::invalid_argument);
}

TEST_CASE("pushforward basics") {
  RngStream rng(84);
  const auto draws = posterior_sample(PriorSpec::right_haar(), kStats5, 1000, rng);
  const auto sig = pushforward(draws, ParamFn::Tag::Sigma1);
  for (std::size_t i = 0; i < draws.size(); ++i)
    CHECK(sig[i] == draws[i].sigma1);
  // a constant functional gives constant output
  const auto zero = pushforward(draws, ParamFn::d_mean(0.0, 0.0));
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("closed-form marginal rows: eligibility") {
  CHECK(has_marginal_constructive(ParamFn::Tag::Mu1, PriorSpec::jeffreys()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Mu1, PriorSpec::right_haar()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Mu1, PriorSpec::ab(1, -2)));
  CHECK_FALSE(has_marginal_constructive(ParamFn::Tag::Mu1, PriorSpec::ind_jeffreys()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Rho, PriorSpec::right_haar()));
  CHECK_FALSE(has_marginal_constructive(ParamFn::Tag::Rho, PriorSpec::jeffreys()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Theta3, PriorSpec::right_haar()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Theta3, PriorSpec::ind_jeffreys()));
  CHECK_FALSE(has_marginal_constructive(ParamFn::Tag::Theta3, PriorSpec::ro()));
  CHECK(has_marginal_constructive(ParamFn::Tag::Eta3, PriorSpec::ab(3.5, 2)));
  CHECK_FALSE(has_marginal_constructive(ParamFn::Tag::Rho, PriorSpec::r_rho()));
  CHECK_FALSE(has_marginal_constructive(ParamFn::Tag::Theta7, PriorSpec::right_haar()));
  CHECK(has_marginal_constructive(ParamFn::d_var(1, 0), PriorSpec::jeffreys()));
  CHECK_FALSE(has_marginal_constructive(ParamFn::d_var(1, 0), PriorSpec::right_haar()));

  RngStream rng(85);
  CHECK_THROWS_AS(marginal_constructive_sample(ParamFn::Tag::Rho, kStats5,
                                               PriorSpec::jeffreys(), 10, rng),
                  std::invalid_argument);
}

TEST_CASE("closed-form marginal rows: forced variates") {
  // theta2 row with s22 = 4, r = 0 and chi^2_{n-2} forced to 2 gives 2.0
  const SuffStats st(6, 0, 0, 3.0, 4.0, 0.0);
  CHECK(marginal_constructive_value(ParamFn::Tag::Theta2, st, 0.3, 1.7, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-14));

  // d'mu with d = (1, 0) degenerates to the mu1 row
  const SuffStats st2(7, 1.1, -0.4, 2.5, 3.5, 0.42);
  for (int k = 0; k < 10; ++k) {
    const double z = -1.0 + 0.2 * k;
    CHECK(marginal_constructive_value(ParamFn::d_mean(1, 0), st2, z, 4.0, 3.0) ==
          doctest::Approx(marginal_constructive_value(ParamFn::Tag::Mu1, st2,
                                                      z, 4.0, 3.0))
              .epsilon(1e-14));
  }

  // theta3 row is |S| over the product of the chi-squareds
  CHECK(marginal_constructive_value(ParamFn::Tag::Theta3, st2, 0.0, 2.0, 5.0) ==
        doctest::Approx(2.5 * 3.5 * (1 - 0.42 * 0.42) / 10.0).epsilon(1e-12));
}

TEST_CASE("rho row outputs lie strictly inside (-1, 1)") {
  RngStream rng(86);
  const auto rho = marginal_constructive_sample(ParamFn::Tag::Rho, kStats5,
                                                PriorSpec::right_haar(), 20000, rng);
  for (double v : rho) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("marginal rows agree in law with the joint sampler pushforward") {
  struct Pair {
    ParamFn param;
    PriorSpec prior;
  };
  const Pair pairs[] = {
      {ParamFn::Tag::Mu1, PriorSpec::right_haar()},
      {ParamFn::Tag::Mu2, PriorSpec::jeffreys()},
      {ParamFn::Tag::MuDiff, PriorSpec::jeffreys()},
      {ParamFn::d_mean(0.8, -1.2), PriorSpec::jeffreys()},
      {ParamFn::Tag::Sigma1, PriorSpec::jeffreys()},
      {ParamFn::Tag::Rho, PriorSpec::right_haar()},
      {ParamFn::Tag::Eta3, PriorSpec::right_haar()},
      {ParamFn::Tag::Theta1, PriorSpec::right_haar()},
      {ParamFn::Tag::Theta2, PriorSpec::right_haar()},
      {ParamFn::Tag::Theta3, PriorSpec::right_haar()},
      {ParamFn::Tag::Theta3, PriorSpec::ind_jeffreys()},
      {ParamFn::Tag::Theta4, PriorSpec::right_haar()},
      {ParamFn::Tag::Theta5, PriorSpec::jeffreys()},
      {ParamFn::d_var(1.0, 0.5), PriorSpec::jeffreys()},
  };
  const long n_draws = 100000;
  std::uint64_t seed = 8600;
  for (const Pair& pair : pairs) {
    RngStream a(seed++), b(seed++);
    const auto direct = marginal_constructive_sample(pair.param, kStats5,
                                                     pair.prior, n_draws, a);
    std::vector<double> joint;
    sample_param_posterior(pair.prior, kStats5, pair.param, n_draws, b, joint);
    CAPTURE(pair.param.name());
    CAPTURE(pair.prior.name());
    CHECK(ks_statistic_two(direct, joint) <
          ks_critical_two(direct.size(), joint.size()));
  }
}
