#pragma once

#include <utility>
#include <vector>

#include "bvn/core.hpp"
#include "bvn/priors.hpp"

namespace bvn {

struct PosteriorDraw {
  double mu1, mu2, sigma1, sigma2, rho;
};

struct McmcOptions {
  long burn_in = 1000;
};

struct McmcDiagnostics {
  double acceptance_rate = 0.0;
  long chain_length = 0;
  long burn_in = 0;
};

// One realization of the independent variates behind a constructive draw:
// z3 standard normal, chi_a ~ chi^2_{n-a}, chi_b ~ chi^2_{n-b}.
struct ScaleVariates {
  double z3, chi_a, chi_b;
};

inline constexpr long kAcceptRejectCap = 1'000'000;

ScaleVariates draw_scale_variates(long n, double a, double b, RngStream& rng);

// The constructive map from variates to a (sigma1, sigma2, rho) draw:
//   sigma1 = sqrt(s11/chi_a),
//   sigma2 = sqrt(s22(1-r^2)) sqrt(1/chi_b + (z3/sqrt(chi_b) - c_r)^2/chi_a),
//   rho    = psi(-z3/sqrt(chi_a) + sqrt(chi_b/chi_a) c_r),
// with c_r = r/sqrt(1-r^2) and psi(y) = y/sqrt(1+y^2).
ScaleParams scale_from_variates(const SuffStats& st, const ScaleVariates& v);

EtaParams eta_from_variates(const SuffStats& st, const ScaleVariates& v);

// Mean draw paired with the scale draw built from the same variates;
// z1, z2 are fresh independent standard normals.
std::pair<double, double> mean_from_variates(const SuffStats& st,
                                             const ScaleVariates& v,
                                             double z1, double z2);

ScaleParams constructive_scale_draw(const SuffStats& st, double a, double b,
                                    RngStream& rng);
EtaParams constructive_eta_draw(const SuffStats& st, double a, double b,
                                RngStream& rng);
std::pair<double, double> constructive_mean_draw(const SuffStats& st,
                                                 const ScaleVariates& v,
                                                 RngStream& rng);
// One joint draw of (mu1, mu2, sigma1, sigma2, rho) under pi_ab.
PosteriorDraw constructive_draw(const SuffStats& st, double a, double b,
                                RngStream& rng);

// A draw from N2(xbar, Sigma/n) given the scale draw.
std::pair<double, double> mean_given_scale_draw(const SuffStats& st,
                                                const ScaleParams& scale,
                                                RngStream& rng);

struct AcceptRejectResult {
  ScaleParams scale;
  long proposals_used;
};

// Accept-reject for the rejection family: propose from the ind-jeffreys
// posterior, accept with probability ratio_to_ij(spec, rho)/M. Throws
// PathologicalDataError after kAcceptRejectCap proposals.
AcceptRejectResult accept_reject_draw(const PriorSpec& spec,
                                      const SuffStats& st, RngStream& rng);

// Long-run fraction of accepted proposals over a fixed proposal count.
double empirical_acceptance_rate(const PriorSpec& spec, const SuffStats& st,
                                 long proposals, RngStream& rng);

// Independence Metropolis-Hastings on (sigma1, sigma2, rho) with the
// ind-jeffreys posterior as proposal; the acceptance ratio reduces to the
// ratio of prior/ind-jeffreys density ratios at proposed vs current state.
// Returns the post-burn-in states (chain_length - burn_in of them).
std::pair<std::vector<ScaleParams>, McmcDiagnostics> mh_scale_chain(
    const PriorSpec& target, const SuffStats& st, long chain_length,
    long burn_in, RngStream& rng);

struct SampleRunInfo {
  long proposals_used = 0;   // accept-reject totals, when applicable
  McmcDiagnostics mcmc{};    // filled when an MH chain ran
  bool mcmc_used = false;
};

// Posterior draws under any catalog prior: constructive for the AB family,
// accept-reject scale + conditional means for the rejection family, and an
// MH chain for r-lambda.
std::vector<PosteriorDraw> posterior_sample(const PriorSpec& spec,
                                            const SuffStats& st, long n_draws,
                                            RngStream& rng,
                                            const McmcOptions& mcmc = {},
                                            SampleRunInfo* info = nullptr);

// n_draws posterior draws of a single scalar parameter -- the fast path the
// coverage engine runs millions of times. Law-equal to
// pushforward(posterior_sample(...), param).
void sample_param_posterior(const PriorSpec& spec, const SuffStats& st,
                            const ParamFn& param, long n_draws, RngStream& rng,
                            std::vector<double>& out,
                            const McmcOptions& mcmc = {});

}  // namespace bvn
