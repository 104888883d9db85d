#include "bvn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bvn {

double empirical_quantile_destructive(std::vector<double>& s, double q) {
  if (s.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("empirical_quantile: q must be in (0, 1)");
  // the 1e-9 guard keeps q*N from crossing an integer through floating-point
  // noise in q itself (e.g. q computed as 1 - level)
  const auto k = std::max<long>(
      1, static_cast<long>(std::ceil(q * static_cast<double>(s.size()) - 1e-9)));
  auto nth = s.begin() + (k - 1);
  std::nth_element(s.begin(), nth, s.end());
  return *nth;
}

double empirical_quantile(std::span<const double> samples, double q) {
  std::vector<double> copy(samples.begin(), samples.end());
  return empirical_quantile_destructive(copy, q);
}

std::vector<double> pushforward(std::span<const PosteriorDraw> draws,
                                const ParamFn& f) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const PosteriorDraw& d : draws)
    out.push_back(param_value(d.mu1, d.mu2, d.sigma1, d.sigma2, d.rho, f));
  return out;
}

bool has_marginal_constructive(const ParamFn& param, const PriorSpec& prior) {
  if (!prior.is_ab()) return false;
  const double a = prior.a, b = prior.b;
  using Tag = ParamFn::Tag;
  switch (param.tag) {
    case Tag::Mu1:
    case Tag::Sigma1:
    case Tag::Theta5:
      return a == 1.0;  // any b
    case Tag::Mu2:
    case Tag::MuDiff:
    case Tag::DMean:
    case Tag::DVar:
      return a == 1.0 && b == 0.0;
    case Tag::Rho:
    case Tag::Theta4:
      return a == 1.0 && b == 2.0;
    case Tag::Eta3:
    case Tag::Theta1:
    case Tag::Theta2:
      return b == 2.0;  // any a
    case Tag::Theta3:
      return (a == 1.0 && b == 2.0) || (a == 2.0 && b == 1.0);
    default:
      return false;
  }
}

double marginal_constructive_value(const ParamFn& param, const SuffStats& st,
                                   double z, double chi_nm1, double chi_nm2) {
  using Tag = ParamFn::Tag;
  const double n = static_cast<double>(st.n);
  const double one_m_r2 = 1.0 - st.r * st.r;
  switch (param.tag) {
    case Tag::Mu1:
      return st.xbar1 + z / std::sqrt(chi_nm1) * std::sqrt(st.s11 / n);
    case Tag::Mu2:
      return st.xbar2 + z / std::sqrt(chi_nm1) * std::sqrt(st.s22 / n);
    case Tag::MuDiff:
    case Tag::DMean: {
      const double d1 = param.tag == Tag::MuDiff ? 1.0 : param.d1;
      const double d2 = param.tag == Tag::MuDiff ? -1.0 : param.d2;
      const double s12 = st.r * std::sqrt(st.s11 * st.s22);
      const double dSd =
          d1 * d1 * st.s11 + 2.0 * d1 * d2 * s12 + d2 * d2 * st.s22;
      return d1 * st.xbar1 + d2 * st.xbar2 +
             z / std::sqrt(chi_nm1) * std::sqrt(dSd / n);
    }
    case Tag::Sigma1:
      return std::sqrt(st.s11 / chi_nm1);
    case Tag::Rho:
      return psi(-z / std::sqrt(chi_nm1) +
                 std::sqrt(chi_nm2 / chi_nm1) * st.r / std::sqrt(one_m_r2));
    case Tag::Eta3:
      return z / std::sqrt(st.s11) -
             std::sqrt(chi_nm2) / std::sqrt(st.s11) * st.r /
                 std::sqrt(one_m_r2);
    case Tag::Theta1:
      return st.r * std::sqrt(st.s22) / std::sqrt(st.s11) -
             z / std::sqrt(chi_nm2) * std::sqrt(one_m_r2) *
                 std::sqrt(st.s22) / std::sqrt(st.s11);
    case Tag::Theta2:
      return st.s22 * one_m_r2 / chi_nm2;
    case Tag::Theta3:
      return st.s11 * st.s22 * one_m_r2 / (chi_nm1 * chi_nm2);
    case Tag::Theta4:
      return std::sqrt(chi_nm1 / chi_nm2) *
             std::sqrt(st.s22 * one_m_r2 / st.s11);
    case Tag::Theta5:
      return z / std::sqrt(n) + st.xbar1 * std::sqrt(chi_nm1) / std::sqrt(st.s11);
    case Tag::DVar: {
      // variance form: the matching square-root map has identical coverage
      const double s12 = st.r * std::sqrt(st.s11 * st.s22);
      const double dSd = param.d1 * param.d1 * st.s11 +
                         2.0 * param.d1 * param.d2 * s12 +
                         param.d2 * param.d2 * st.s22;
      return dSd / chi_nm1;
    }
    default:
      throw std::invalid_argument(
          "marginal_constructive_value: no closed-form row for " +
          param.name());
  }
}

std::vector<double> marginal_constructive_sample(const ParamFn& param,
                                                 const SuffStats& st,
                                                 const PriorSpec& prior,
                                                 long n_draws, RngStream& rng) {
  if (!has_marginal_constructive(param, prior))
    throw std::invalid_argument("no closed-form constructive posterior for (" +
                                param.name() + ", " + prior.name() + ")");
  if (n_draws < 0)
    throw std::invalid_argument("marginal_constructive_sample: n_draws >= 0");
  std::vector<double> out(static_cast<std::size_t>(n_draws));
  const double nm1 = static_cast<double>(st.n) - 1.0;
  const double nm2 = static_cast<double>(st.n) - 2.0;
  for (long i = 0; i < n_draws; ++i) {
    const double z = rng.normal();
    const double chi1 = rng.chisq(nm1);
    const double chi2 = rng.chisq(nm2);
    out[static_cast<std::size_t>(i)] =
        marginal_constructive_value(param, st, z, chi1, chi2);
  }
  return out;
}

CredibleInterval credible_interval(std::span<const double> samples,
                                   const ParamFn& param, double level,
                                   IntervalSide side) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("credible_interval: level must be in (0, 1)");
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (side) {
    case IntervalSide::UpperOpen:
      return {param, level, side, -inf, empirical_quantile(samples, level)};
    case IntervalSide::LowerOpen:
      return {param, level, side, empirical_quantile(samples, 1.0 - level),
              inf};
    case IntervalSide::TwoSided: {
      const double tail = 0.5 * (1.0 - level);
      return {param, level, side, empirical_quantile(samples, tail),
              empirical_quantile(samples, 1.0 - tail)};
    }
  }
  throw std::logic_error("credible_interval: unhandled side");
}

}  // namespace bvn
