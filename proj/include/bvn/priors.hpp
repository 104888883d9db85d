#pragma once

#include <string>

#include "bvn/core.hpp"

namespace bvn {

// The prior catalog over (sigma1, sigma2, rho). A flat prior on the means is
// implicit for every member. All densities are improper; log densities carry
// an arbitrary additive constant fixed at zero, and downstream algorithms
// consume ratios only.
//
// The AB family is
//   pi_ab = sigma1^{-(3-a)} sigma2^{-(2-b)} (1-rho^2)^{-(2-b/2)},
// with named members jeffreys (1,0), right-haar (1,2), ind-jeffreys (2,1)
// and ro (1,1).
struct PriorSpec {
  enum class Family { AB, Rrho, Rsigma, RsigmaTilde, S, Rlambda };

  Family family = Family::AB;
  double a = 0.0, b = 0.0;  // AB only

  static PriorSpec ab(double a, double b) { return {Family::AB, a, b}; }
  static PriorSpec jeffreys() { return ab(1.0, 0.0); }
  static PriorSpec right_haar() { return ab(1.0, 2.0); }
  static PriorSpec ind_jeffreys() { return ab(2.0, 1.0); }
  static PriorSpec ro() { return ab(1.0, 1.0); }
  static PriorSpec r_rho() { return {Family::Rrho, 0.0, 0.0}; }
  static PriorSpec r_sigma() { return {Family::Rsigma, 0.0, 0.0}; }
  static PriorSpec r_sigma_tilde() { return {Family::RsigmaTilde, 0.0, 0.0}; }
  static PriorSpec scale_prior() { return {Family::S, 0.0, 0.0}; }
  static PriorSpec r_lambda() { return {Family::Rlambda, 0.0, 0.0}; }

  bool is_ab() const { return family == Family::AB; }
  // Members whose posterior is sampled by accept-reject from the
  // ind-jeffreys proposal with a finite density-ratio bound.
  bool in_rejection_family() const {
    return family == Family::Rrho || family == Family::Rsigma ||
           family == Family::RsigmaTilde || family == Family::S;
  }

  std::string name() const;
  // Accepts "jeffreys", "right-haar", "ind-jeffreys", "ro", "r-rho",
  // "r-sigma", "r-sigma-tilde", "r-lambda", "scale", "ab:<a>:<b>".
  static PriorSpec parse(const std::string& text);
};

// Log density w.r.t. d sigma1 d sigma2 d rho. Throws PriorPoleError for
// r-lambda exactly at sigma1 = sigma2, rho = 0.
double log_prior_density(const PriorSpec& spec, const ScaleParams& scale);

// pi/pi_IJ as a function of rho alone; defined for the rejection family.
double ratio_to_ij(const PriorSpec& spec, double rho);

// Upper bound M of ratio_to_ij over rho.
double rejection_bound(const PriorSpec& spec);

// ratio_to_ij / M: the pointwise acceptance rate of the rejection step.
double acceptance_probability(const PriorSpec& spec, double rho);

}  // namespace bvn
