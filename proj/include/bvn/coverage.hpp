#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bvn/core.hpp"
#include "bvn/priors.hpp"
#include "bvn/samplers.hpp"

namespace bvn {

// Which one-sided interval is scored: Upper covers when the true value is
// below the level-quantile, Lower covers when it is above the
// (1-level)-quantile. Both have nominal coverage `level`.
enum class TailSide { Lower, Upper };
enum class DataEngine { Pivotal, RawData };
enum class ExecMode { Serial, Parallel };
enum class InnerQuantile { MonteCarlo, ClosedForm };

struct CoverageOptions {
  long inner_draws = 4000;
  TailSide side = TailSide::Upper;
  DataEngine engine = DataEngine::Pivotal;
  ExecMode exec = ExecMode::Parallel;
  McmcOptions mcmc{};
};

struct CoverageResult {
  PriorSpec prior;
  ParamFn param;
  BvnParams truth;
  long n;
  double level;
  TailSide side;
  long reps;
  double coverage;
  double mc_stderr;  // sqrt(coverage (1 - coverage) / reps)
};

struct ScatterStats {
  double s11, s22, r;
};

// (s11, s22, r) with the exact sampling law, built from the three
// independent pivotals (one normal, chi^2_{n-2}, chi^2_{n-1}) instead of
// raw data.
ScatterStats pivotal_suffstats(const ScaleParams& truth, long n,
                               RngStream& rng);
// Full sufficient statistics: pivotal scatter plus xbar ~ N2(mu, Sigma/n).
SuffStats pivotal_full_suffstats(const BvnParams& truth, long n,
                                 RngStream& rng);

// Frequentist coverage of the one-sided credible interval by Monte Carlo
// over data replications. Replications use rng.child(rep), so the result is
// deterministic given (rng, reps) regardless of thread count.
CoverageResult simulate_coverage(const PriorSpec& prior, const ParamFn& param,
                                 const BvnParams& truth, long n, double level,
                                 long reps, const RngStream& rng,
                                 const CoverageOptions& opts = {});

// Scores several (level, side) targets over shared replications and shared
// posterior draws; one result per target, in target order.
std::vector<CoverageResult> simulate_coverage_multi(
    const PriorSpec& prior, const ParamFn& param, const BvnParams& truth,
    long n, std::span<const std::pair<double, TailSide>> targets, long reps,
    const RngStream& rng, const CoverageOptions& opts = {});

// The coverage identities: each names the parameter-free probability that
// the corresponding data-level coverage provably equals, evaluated by direct
// Monte Carlo over the stated normal/chi-squared variates (no data, no
// posterior sampling).
struct PivotalSpec {
  enum class Which {
    RhoIdentity,     // P(V > q_alpha(V*)), V = (sqrt(1-rho^2) Z + rho sqrt(chi^2_{n-1}))/sqrt(chi^2_{n-2})
    Eta3Identity,    // shared chi^2_{n-1} inside the starred quantile
    Theta1Identity,  // P(t_{n-2} < sqrt((n-2)/(n-b)) q_level(t_{n-b}))
    Theta2Identity,  // P(chi^2_{n-2} > q_alpha(chi^2_{n-b}))
    Theta3Identity,  // P(chi^2_{n-1} chi^2_{n-2} > q_alpha(chi^2_{n-a} chi^2_{n-b}))
    Theta4Identity,  // P(chi^2_{n-1}/chi^2_{n-2} < q_level(chi^2_{n-a}/chi^2_{n-b}))
    Theta5Identity,  // noncentral-t comparison; depends on theta5 only
  };
  Which which;
  double a = 1.0, b = 2.0;
  double x = 0.0;  // rho for Rho/Eta3, theta5 for Theta5; ignored otherwise
  long n = 3;
};

struct IdentityOptions {
  long inner_draws = 4000;
  // ClosedForm substitutes exact quantiles where the identity permits
  // (Theta1/Theta2/Theta4/Theta5); the rest always use inner Monte Carlo.
  InnerQuantile inner = InnerQuantile::MonteCarlo;
  ExecMode exec = ExecMode::Parallel;
};

double coverage_identity(const PivotalSpec& spec, double level, long mc_reps,
                         const RngStream& rng,
                         const IdentityOptions& opts = {});

// Runs the data-level simulation and the matching pivotal identity for one
// (a, b) and parameter; the contract is agreement within combined MC error.
// x is rho for Rho/Eta3/Theta1..Theta4 (also used as the truth rho) and
// theta5 for Theta5.
std::pair<CoverageResult, double> cross_validate(
    double a, double b, const ParamFn& param, double x, long n, double level,
    long reps, const RngStream& rng, const CoverageOptions& cov_opts = {},
    const IdentityOptions& id_opts = {});

enum class SigmaCase { A, B };  // truth (0,0,1,1) vs (0,0,2,1)

// Coverage curve over a rho grid, both tails per grid point (Lower then
// Upper), at the given level.
std::vector<CoverageResult> rho_scan(const PriorSpec& prior,
                                     const ParamFn& param, long n,
                                     double level,
                                     std::span<const double> rho_grid,
                                     long reps, const RngStream& rng,
                                     SigmaCase sigma_case,
                                     const CoverageOptions& opts = {});

}  // namespace bvn
