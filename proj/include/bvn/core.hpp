#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bvn/errors.hpp"
#include "bvn/rng.hpp"

namespace bvn {

// |r| >= 1 - kDegenerateRhoTol is rejected: the constructive formulas divide
// by sqrt(1 - r^2) and the model collapses to the univariate case there.
inline constexpr double kDegenerateRhoTol = 1e-12;

// (sigma1, sigma2, rho) block of a parameter point.
struct ScaleParams {
  double sigma1, sigma2, rho;
  ScaleParams(double sigma1, double sigma2, double rho);
};

struct BvnParams {
  double mu1, mu2, sigma1, sigma2, rho;
  BvnParams(double mu1, double mu2, double sigma1, double sigma2, double rho);
  ScaleParams scale() const { return {sigma1, sigma2, rho}; }
};

// Cholesky-type coordinates of the precision matrix:
//   eta1 = 1/sigma1, eta2 = 1/(sigma2 sqrt(1-rho^2)),
//   eta3 = -rho/(sigma1 sqrt(1-rho^2)).
struct EtaParams {
  double eta1, eta2, eta3;
  EtaParams(double eta1, double eta2, double eta3);
};

// Sample size, means, centered sums of squares and sample correlation.
// s11/s22 are sums of squared deviations, not variances.
struct SuffStats {
  long n;
  double xbar1, xbar2;
  double s11, s22;
  double r;
  SuffStats(long n, double xbar1, double xbar2, double s11, double s22, double r);
};

// Names a scalar function of the parameter point.
struct ParamFn {
  enum class Tag {
    Mu1, Mu2, MuDiff,
    Sigma1, Sigma2, Rho,
    Eta1, Eta2, Eta3,
    Theta1,   // rho sigma2 / sigma1, the regression coefficient
    Theta2,   // sigma2^2 (1 - rho^2), the conditional variance
    Theta3,   // |Sigma|, the generalized variance
    Theta4,   // sigma2 sqrt(1 - rho^2) / sigma1
    Theta5,   // mu1 / sigma1
    Theta6,   // sigma1^2 sigma2^2
    Theta7,   // sigma2 / sigma1
    Theta8,   // mu2 / sigma2
    Theta9,   // rho sigma1 sigma2, the covariance
    Theta10,  // var(x1 - x2)
    Lambda1, Lambda2,
    DMean,    // d'(mu1, mu2)
    DVar,     // d'Sigma d, d not proportional to (0, 1)
  };

  Tag tag;
  double d1 = 0.0, d2 = 0.0;  // only meaningful for DMean/DVar

  ParamFn(Tag t) : tag(t) {}  // NOLINT: implicit by design
  static ParamFn d_mean(double d1, double d2);
  static ParamFn d_var(double d1, double d2);

  bool needs_means() const;
  std::string name() const;
  static ParamFn parse(const std::string& text);
};

EtaParams eta_from_sigma(const ScaleParams& s);
ScaleParams sigma_from_eta(const EtaParams& e);

// y / sqrt(1 + y^2), overflow-safe and clamped strictly inside (-1, 1):
// for |y| beyond ~6.7e7 the exact value rounds to +-1.0 in doubles, which
// the correlation domain excludes.
double psi(double y);

double param_value(double mu1, double mu2, double sigma1, double sigma2,
                   double rho, const ParamFn& f);
double param_value(const BvnParams& p, const ParamFn& f);

// Throws DegenerateDataError when any sufficient-statistic invariant fails.
SuffStats suff_stats(std::span<const std::pair<double, double>> data);

std::vector<std::pair<double, double>> sample_bvn(const BvnParams& p, long n,
                                                  RngStream& rng);

// log of |Sigma|^{-(n-1)/2} exp(-trace(S Sigma^{-1})/2); the additive
// constant is fixed at zero.
double log_marginal_likelihood(const SuffStats& stats, const ScaleParams& scale);

}  // namespace bvn
