#include "bvn/samplers.hpp"

#include <cmath>
#include <tuple>

namespace bvn {

namespace {

void check_dof(long n, double a, double b) {
  if (n < 3) throw std::invalid_argument("samplers: n must be >= 3");
  if (!(static_cast<double>(n) - a > 0.0) ||
      !(static_cast<double>(n) - b > 0.0))
    throw std::invalid_argument("samplers: nonpositive degrees of freedom");
}

}  // namespace

ScaleVariates draw_scale_variates(long n, double a, double b, RngStream& rng) {
  check_dof(n, a, b);
  ScaleVariates v{};
  v.z3 = rng.normal();
  v.chi_a = rng.chisq(static_cast<double>(n) - a);
  v.chi_b = rng.chisq(static_cast<double>(n) - b);
  return v;
}

ScaleParams scale_from_variates(const SuffStats& st, const ScaleVariates& v) {
  const double cr = st.r / std::sqrt(1.0 - st.r * st.r);
  const double sigma1 = std::sqrt(st.s11 / v.chi_a);
  const double t = v.z3 / std::sqrt(v.chi_b) - cr;
  const double sigma2 = std::sqrt(st.s22 * (1.0 - st.r * st.r)) *
                        std::sqrt(1.0 / v.chi_b + t * t / v.chi_a);
  const double y = -v.z3 / std::sqrt(v.chi_a) + std::sqrt(v.chi_b / v.chi_a) * cr;
  return {sigma1, sigma2, psi(y)};
}

EtaParams eta_from_variates(const SuffStats& st, const ScaleVariates& v) {
  const double cr = st.r / std::sqrt(1.0 - st.r * st.r);
  const double root_s11 = std::sqrt(st.s11);
  return {std::sqrt(v.chi_a / st.s11),
          std::sqrt(v.chi_b / (st.s22 * (1.0 - st.r * st.r))),
          v.z3 / root_s11 - std::sqrt(v.chi_b) * cr / root_s11};
}

std::pair<double, double> mean_from_variates(const SuffStats& st,
                                             const ScaleVariates& v,
                                             double z1, double z2) {
  const double sqrt_n = std::sqrt(static_cast<double>(st.n));
  const double sqrt_a = std::sqrt(v.chi_a);
  const double sqrt_b = std::sqrt(v.chi_b);
  const double mu1 = st.xbar1 + z1 / sqrt_a * std::sqrt(st.s11) / sqrt_n;
  const double mu2 =
      st.xbar2 + z1 / sqrt_a * st.r * std::sqrt(st.s22) / sqrt_n +
      (z2 / sqrt_b - v.z3 / sqrt_b * z1 / sqrt_a) *
          std::sqrt(st.s22 * (1.0 - st.r * st.r)) / sqrt_n;
  return {mu1, mu2};
}

ScaleParams constructive_scale_draw(const SuffStats& st, double a, double b,
                                    RngStream& rng) {
  return scale_from_variates(st, draw_scale_variates(st.n, a, b, rng));
}

EtaParams constructive_eta_draw(const SuffStats& st, double a, double b,
                                RngStream& rng) {
  return eta_from_variates(st, draw_scale_variates(st.n, a, b, rng));
}

std::pair<double, double> constructive_mean_draw(const SuffStats& st,
                                                 const ScaleVariates& v,
                                                 RngStream& rng) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  return mean_from_variates(st, v, z1, z2);
}

PosteriorDraw constructive_draw(const SuffStats& st, double a, double b,
                                RngStream& rng) {
  const ScaleVariates v = draw_scale_variates(st.n, a, b, rng);
  const ScaleParams sc = scale_from_variates(st, v);
  const auto [mu1, mu2] = constructive_mean_draw(st, v, rng);
  return {mu1, mu2, sc.sigma1, sc.sigma2, sc.rho};
}

std::pair<double, double> mean_given_scale_draw(const SuffStats& st,
                                                const ScaleParams& sc,
                                                RngStream& rng) {
  const double sqrt_n = std::sqrt(static_cast<double>(st.n));
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double root = std::sqrt(1.0 - sc.rho * sc.rho);
  return {st.xbar1 + sc.sigma1 * z1 / sqrt_n,
          st.xbar2 + sc.sigma2 * (sc.rho * z1 + root * z2) / sqrt_n};
}

AcceptRejectResult accept_reject_draw(const PriorSpec& spec,
                                      const SuffStats& st, RngStream& rng) {
  const double bound = rejection_bound(spec);  // rejects non-members
  for (long i = 1; i <= kAcceptRejectCap; ++i) {
    const ScaleParams proposal = constructive_scale_draw(st, 2.0, 1.0, rng);
    const double u = rng.uniform01();
    if (u <= ratio_to_ij(spec, proposal.rho) / bound) return {proposal, i};
  }
  throw PathologicalDataError(
      "accept_reject_draw: no acceptance within proposal cap");
}

double empirical_acceptance_rate(const PriorSpec& spec, const SuffStats& st,
                                 long proposals, RngStream& rng) {
  if (proposals < 1)
    throw std::invalid_argument("empirical_acceptance_rate: proposals >= 1");
  const double bound = rejection_bound(spec);
  long accepted = 0;
  for (long i = 0; i < proposals; ++i) {
    const ScaleParams proposal = constructive_scale_draw(st, 2.0, 1.0, rng);
    const double u = rng.uniform01();
    if (u <= ratio_to_ij(spec, proposal.rho) / bound) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(proposals);
}

std::pair<std::vector<ScaleParams>, McmcDiagnostics> mh_scale_chain(
    const PriorSpec& target, const SuffStats& st, long chain_length,
    long burn_in, RngStream& rng) {
  if (!(chain_length > burn_in && burn_in >= 0))
    throw std::invalid_argument("mh_scale_chain: need chain_length > burn_in >= 0");
  const PriorSpec ij = PriorSpec::ind_jeffreys();
  // Proposal is the ind-jeffreys posterior, so the likelihood cancels and
  // the MH weight is the prior density ratio alone.
  const auto log_weight = [&](const ScaleParams& sc) {
    return log_prior_density(target, sc) - log_prior_density(ij, sc);
  };

  ScaleParams state = constructive_scale_draw(st, 2.0, 1.0, rng);
  double state_lw = log_weight(state);
  long accepted = 0;
  std::vector<ScaleParams> kept;
  kept.reserve(static_cast<std::size_t>(chain_length - burn_in));
  for (long step = 0; step < chain_length; ++step) {
    const ScaleParams proposal = constructive_scale_draw(st, 2.0, 1.0, rng);
    const double prop_lw = log_weight(proposal);
    const double u = rng.uniform_pos();
    if (std::log(u) < prop_lw - state_lw) {
      state = proposal;
      state_lw = prop_lw;
      ++accepted;
    }
    if (step >= burn_in) kept.push_back(state);
  }
  McmcDiagnostics diag;
  diag.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(chain_length);
  diag.chain_length = chain_length;
  diag.burn_in = burn_in;
  return {std::move(kept), diag};
}

std::vector<PosteriorDraw> posterior_sample(const PriorSpec& spec,
                                            const SuffStats& st, long n_draws,
                                            RngStream& rng,
                                            const McmcOptions& mcmc,
                                            SampleRunInfo* info) {
  if (n_draws < 0) throw std::invalid_argument("posterior_sample: n_draws >= 0");
  std::vector<PosteriorDraw> out;
  out.reserve(static_cast<std::size_t>(n_draws));
  if (n_draws == 0) return out;

  if (spec.is_ab()) {
    check_dof(st.n, spec.a, spec.b);
    for (long i = 0; i < n_draws; ++i)
      out.push_back(constructive_draw(st, spec.a, spec.b, rng));
    return out;
  }
  if (spec.in_rejection_family()) {
    long proposals = 0;
    for (long i = 0; i < n_draws; ++i) {
      const AcceptRejectResult ar = accept_reject_draw(spec, st, rng);
      proposals += ar.proposals_used;
      const auto [mu1, mu2] = mean_given_scale_draw(st, ar.scale, rng);
      out.push_back({mu1, mu2, ar.scale.sigma1, ar.scale.sigma2, ar.scale.rho});
    }
    if (info) info->proposals_used = proposals;
    return out;
  }
  // r-lambda: independence MH, one kept state per requested draw.
  auto [states, diag] =
      mh_scale_chain(spec, st, mcmc.burn_in + n_draws, mcmc.burn_in, rng);
  for (const ScaleParams& sc : states) {
    const auto [mu1, mu2] = mean_given_scale_draw(st, sc, rng);
    out.push_back({mu1, mu2, sc.sigma1, sc.sigma2, sc.rho});
  }
  if (info) {
    info->mcmc = diag;
    info->mcmc_used = true;
  }
  return out;
}

void sample_param_posterior(const PriorSpec& spec, const SuffStats& st,
                            const ParamFn& param, long n_draws, RngStream& rng,
                            std::vector<double>& out,
                            const McmcOptions& mcmc) {
  if (n_draws < 0)
    throw std::invalid_argument("sample_param_posterior: n_draws >= 0");
  out.resize(static_cast<std::size_t>(n_draws));
  const bool means = param.needs_means();

  if (spec.is_ab()) {
    check_dof(st.n, spec.a, spec.b);
    for (long i = 0; i < n_draws; ++i) {
      const ScaleVariates v = draw_scale_variates(st.n, spec.a, spec.b, rng);
      const ScaleParams sc = scale_from_variates(st, v);
      double mu1 = 0.0, mu2 = 0.0;
      if (means) std::tie(mu1, mu2) = constructive_mean_draw(st, v, rng);
      out[static_cast<std::size_t>(i)] =
          param_value(mu1, mu2, sc.sigma1, sc.sigma2, sc.rho, param);
    }
    return;
  }
  if (spec.in_rejection_family()) {
    for (long i = 0; i < n_draws; ++i) {
      const ScaleParams sc = accept_reject_draw(spec, st, rng).scale;
      double mu1 = 0.0, mu2 = 0.0;
      if (means) std::tie(mu1, mu2) = mean_given_scale_draw(st, sc, rng);
      out[static_cast<std::size_t>(i)] =
          param_value(mu1, mu2, sc.sigma1, sc.sigma2, sc.rho, param);
    }
    return;
  }
  auto [states, diag] =
      mh_scale_chain(spec, st, mcmc.burn_in + n_draws, mcmc.burn_in, rng);
  for (long i = 0; i < n_draws; ++i) {
    const ScaleParams& sc = states[static_cast<std::size_t>(i)];
    double mu1 = 0.0, mu2 = 0.0;
    if (means) std::tie(mu1, mu2) = mean_given_scale_draw(st, sc, rng);
    out[static_cast<std::size_t>(i)] =
        param_value(mu1, mu2, sc.sigma1, sc.sigma2, sc.rho, param);
  }
}

}  // namespace bvn
