#include "bvn/priors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace bvn {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::string g_format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

std::string PriorSpec::name() const {
  switch (family) {
    case Family::Rrho: return "r-rho";
    case Family::Rsigma: return "r-sigma";
    case Family::RsigmaTilde: return "r-sigma-tilde";
    case Family::S: return "scale";
    case Family::Rlambda: return "r-lambda";
    case Family::AB: break;
  }
  if (a == 1.0 && b == 0.0) return "jeffreys";
  if (a == 1.0 && b == 2.0) return "right-haar";
  if (a == 2.0 && b == 1.0) return "ind-jeffreys";
  if (a == 1.0 && b == 1.0) return "ro";
  return "ab:" + g_format(a) + ":" + g_format(b);
}

PriorSpec PriorSpec::parse(const std::string& text) {
  if (text == "jeffreys") return jeffreys();
  if (text == "right-haar") return right_haar();
  if (text == "ind-jeffreys") return ind_jeffreys();
  if (text == "ro") return ro();
  if (text == "r-rho") return r_rho();
  if (text == "r-sigma") return r_sigma();
  if (text == "r-sigma-tilde") return r_sigma_tilde();
  if (text == "r-lambda") return r_lambda();
  if (text == "scale") return scale_prior();
  if (text.rfind("ab:", 0) == 0) {
    const auto c = text.find(':', 3);
    if (c != std::string::npos) {
      const std::string sa = text.substr(3, c - 3);
      const std::string sb = text.substr(c + 1);
      char* ea = nullptr;
      char* eb = nullptr;
      const double a = std::strtod(sa.c_str(), &ea);
      const double b = std::strtod(sb.c_str(), &eb);
      if (!sa.empty() && !sb.empty() && ea && *ea == '\0' && eb && *eb == '\0')
        return ab(a, b);
    }
  }
  throw std::invalid_argument("unknown prior name: " + text);
}

double log_prior_density(const PriorSpec& spec, const ScaleParams& sc) {
  const double l1 = std::log(sc.sigma1);
  const double l2 = std::log(sc.sigma2);
  const double lr = std::log(1.0 - sc.rho * sc.rho);
  switch (spec.family) {
    case PriorSpec::Family::AB:
      return -(3.0 - spec.a) * l1 - (2.0 - spec.b) * l2 -
             (2.0 - 0.5 * spec.b) * lr;
    case PriorSpec::Family::Rrho:
      return -l1 - l2 - lr;
    case PriorSpec::Family::Rsigma:
      return 0.5 * std::log(1.0 + sc.rho * sc.rho) - l1 - l2 - lr;
    case PriorSpec::Family::RsigmaTilde:
      return -l1 - l2 - lr - 0.5 * std::log(2.0 - sc.rho * sc.rho);
    case PriorSpec::Family::S:
      return -l1 - l2;
    case PriorSpec::Family::Rlambda: {
      const double q = sc.sigma1 / sc.sigma2 - sc.sigma2 / sc.sigma1;
      const double arg = q * q + 4.0 * sc.rho * sc.rho;
      if (arg == 0.0)
        throw PriorPoleError(
            "r-lambda density pole at sigma1 = sigma2, rho = 0");
      return -l1 - l2 - lr - 0.5 * std::log(arg);
    }
  }
  throw std::logic_error("log_prior_density: unhandled family");
}

double ratio_to_ij(const PriorSpec& spec, double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::invalid_argument("ratio_to_ij: |rho| must be < 1");
  const double one_m_rho2 = 1.0 - rho * rho;
  switch (spec.family) {
    case PriorSpec::Family::Rrho:
      return std::sqrt(one_m_rho2);
    case PriorSpec::Family::Rsigma:
      return std::sqrt(1.0 - rho * rho * rho * rho);
    case PriorSpec::Family::RsigmaTilde:
      return std::sqrt(one_m_rho2 / (2.0 - rho * rho));
    case PriorSpec::Family::S:
      return one_m_rho2 * std::sqrt(one_m_rho2);
    default:
      throw UnsupportedPriorError("ratio_to_ij: no bounded ratio for " +
                                  spec.name());
  }
}

double rejection_bound(const PriorSpec& spec) {
  switch (spec.family) {
    case PriorSpec::Family::Rrho:
    case PriorSpec::Family::Rsigma:
    case PriorSpec::Family::S:
      return 1.0;
    case PriorSpec::Family::RsigmaTilde:
      return kInvSqrt2;
    default:
      throw UnsupportedPriorError("rejection_bound: no bounded ratio for " +
                                  spec.name());
  }
}

double acceptance_probability(const PriorSpec& spec, double rho) {
  return ratio_to_ij(spec, rho) / rejection_bound(spec);
}

}  // namespace bvn
