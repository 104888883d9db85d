#pragma once

#include <span>
#include <vector>

#include "bvn/core.hpp"
#include "bvn/priors.hpp"
#include "bvn/samplers.hpp"

namespace bvn {

// Inverse empirical CDF: the ceil(q*N)-th order statistic (1-based).
// No interpolation, so strictly increasing maps and positive scalings
// commute with it exactly.
double empirical_quantile(std::span<const double> samples, double q);
// Same quantile, reordering the buffer in place instead of copying.
double empirical_quantile_destructive(std::vector<double>& samples, double q);

std::vector<double> pushforward(std::span<const PosteriorDraw> draws,
                                const ParamFn& f);

// Closed-form marginal constructive posteriors for the exactly matching
// (parameter, prior) pairs: each eligible parameter has a direct simulation
// recipe in terms of one standard normal and chi^2_{n-1}, chi^2_{n-2}.
// Kept independent of the joint samplers so the two paths can check each
// other in law.
bool has_marginal_constructive(const ParamFn& param, const PriorSpec& prior);
double marginal_constructive_value(const ParamFn& param, const SuffStats& st,
                                   double z, double chi_nm1, double chi_nm2);
std::vector<double> marginal_constructive_sample(const ParamFn& param,
                                                 const SuffStats& st,
                                                 const PriorSpec& prior,
                                                 long n_draws, RngStream& rng);

enum class IntervalSide { LowerOpen, UpperOpen, TwoSided };

struct CredibleInterval {
  ParamFn param;
  double level;
  IntervalSide side;
  double lower, upper;  // infinite endpoint on the open side
};

// UpperOpen: (-inf, q_level]; LowerOpen: [q_{1-level}, +inf);
// TwoSided: equal-tailed at (1-level)/2 each side.
CredibleInterval credible_interval(std::span<const double> samples,
                                   const ParamFn& param, double level,
                                   IntervalSide side);

}  // namespace bvn
