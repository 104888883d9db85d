#include "bvn/coverage.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "bvn/inference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bvn {

namespace {

using RepBody = std::function<std::uint64_t(long)>;

// Counts per-target hits over independent replications. Replication i uses
// only data derived from rng.child(i), and the aggregates are integer sums,
// so the counts are identical for any schedule or thread count. Exceptions
// raised inside the parallel region are captured and rethrown afterwards.
std::vector<long> count_hits_multi(long reps, int n_targets, ExecMode exec,
                                   const RepBody& body) {
  std::vector<long> counts(static_cast<std::size_t>(n_targets), 0);
#ifdef _OPENMP
  if (exec == ExecMode::Parallel) {
    std::exception_ptr error;
    std::atomic<bool> failed{false};
#pragma omp parallel
    {
      std::vector<long> local(static_cast<std::size_t>(n_targets), 0);
#pragma omp for schedule(dynamic, 64) nowait
      for (long i = 0; i < reps; ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          const std::uint64_t mask = body(i);
          for (int t = 0; t < n_targets; ++t)
            local[static_cast<std::size_t>(t)] +=
                static_cast<long>((mask >> t) & 1u);
        } catch (...) {
#pragma omp critical(bvn_count_hits_error)
          {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      }
#pragma omp critical(bvn_count_hits_reduce)
      {
        for (int t = 0; t < n_targets; ++t)
          counts[static_cast<std::size_t>(t)] +=
              local[static_cast<std::size_t>(t)];
      }
    }
    if (error) std::rethrow_exception(error);
    return counts;
  }
#else
  (void)exec;
#endif
  for (long i = 0; i < reps; ++i) {
    const std::uint64_t mask = body(i);
    for (int t = 0; t < n_targets; ++t)
      counts[static_cast<std::size_t>(t)] +=
          static_cast<long>((mask >> t) & 1u);
  }
  return counts;
}

long count_hits(long reps, ExecMode exec,
                const std::function<bool(long)>& body) {
  return count_hits_multi(
      reps, 1, exec,
      [&body](long i) -> std::uint64_t { return body(i) ? 1u : 0u; })[0];
}

double stderr_of(double p, long reps) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("coverage: level must be in (0, 1)");
}

}  // namespace

ScatterStats pivotal_suffstats(const ScaleParams& tr, long n, RngStream& rng) {
  if (n < 3) throw std::invalid_argument("pivotal_suffstats: n must be >= 3");
  const double nd = static_cast<double>(n);
  const double z3 = rng.normal();
  const double chi1 = rng.chisq(nd - 1.0);
  const double chi2 = rng.chisq(nd - 2.0);
  const double s11 = tr.sigma1 * tr.sigma1 * chi1;
  const double cond_sd = tr.sigma2 * std::sqrt(1.0 - tr.rho * tr.rho);
  // r sqrt(s22) and s22 (1 - r^2) recovered from the pivotals
  const double u =
      tr.rho * tr.sigma2 / tr.sigma1 * std::sqrt(s11) + cond_sd * z3;
  const double w = cond_sd * cond_sd * chi2;
  const double s22 = u * u + w;
  return {s11, s22, u / std::sqrt(s22)};
}

SuffStats pivotal_full_suffstats(const BvnParams& truth, long n,
                                 RngStream& rng) {
  const ScatterStats sc = pivotal_suffstats(truth.scale(), n, rng);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double root = std::sqrt(1.0 - truth.rho * truth.rho);
  const double xbar1 = truth.mu1 + truth.sigma1 * z1 / sqrt_n;
  const double xbar2 =
      truth.mu2 + truth.sigma2 * (truth.rho * z1 + root * z2) / sqrt_n;
  return {n, xbar1, xbar2, sc.s11, sc.s22, sc.r};
}

namespace {

// Samples that land inside the degeneracy guard (|r| within 1e-12 of 1)
// are rejected by the stats type; redraw from the same stream so the result
// stays deterministic. Affects O(1e-6) of replications at |rho| = 0.9, n = 3.
SuffStats replicate_data(const BvnParams& truth, long n, DataEngine engine,
                         RngStream& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    try {
      if (engine == DataEngine::Pivotal)
        return pivotal_full_suffstats(truth, n, rng);
      return suff_stats(sample_bvn(truth, n, rng));
    } catch (const DegenerateDataError&) {
    }
  }
  throw PathologicalDataError("coverage engine: persistent degenerate samples");
}

}  // namespace

std::vector<CoverageResult> simulate_coverage_multi(
    const PriorSpec& prior, const ParamFn& param, const BvnParams& truth,
    long n, std::span<const std::pair<double, TailSide>> targets, long reps,
    const RngStream& rng, const CoverageOptions& opts) {
  if (reps < 1) throw std::invalid_argument("simulate_coverage: reps >= 1");
  if (opts.inner_draws < 1)
    throw std::invalid_argument("simulate_coverage: inner_draws >= 1");
  if (targets.empty() || targets.size() > 64)
    throw std::invalid_argument("simulate_coverage: 1..64 targets");
  if (n < 3) throw std::invalid_argument("simulate_coverage: n >= 3");
  for (const auto& [level, side] : targets) check_level(level);
  if (prior.is_ab() &&
      (!(static_cast<double>(n) - prior.a > 0.0) ||
       !(static_cast<double>(n) - prior.b > 0.0)))
    throw std::invalid_argument("simulate_coverage: nonpositive degrees of freedom");

  const double truth_value = param_value(truth, param);
  const int n_targets = static_cast<int>(targets.size());

  const RepBody body = [&](long rep) -> std::uint64_t {
    RngStream child = rng.child(static_cast<std::uint64_t>(rep));
    const SuffStats st = replicate_data(truth, n, opts.engine, child);
    thread_local std::vector<double> buf;
    sample_param_posterior(prior, st, param, opts.inner_draws, child, buf,
                           opts.mcmc);
    std::uint64_t mask = 0;
    for (int t = 0; t < n_targets; ++t) {
      const auto& [level, side] = targets[static_cast<std::size_t>(t)];
      const double q = empirical_quantile_destructive(
          buf, side == TailSide::Upper ? level : 1.0 - level);
      const bool hit =
          side == TailSide::Upper ? truth_value < q : truth_value > q;
      if (hit) mask |= std::uint64_t{1} << t;
    }
    return mask;
  };

  const std::vector<long> counts =
      count_hits_multi(reps, n_targets, opts.exec, body);
  std::vector<CoverageResult> out;
  out.reserve(targets.size());
  for (int t = 0; t < n_targets; ++t) {
    const auto& [level, side] = targets[static_cast<std::size_t>(t)];
    const double p =
        static_cast<double>(counts[static_cast<std::size_t>(t)]) /
        static_cast<double>(reps);
    out.push_back({prior, param, truth, n, level, side, reps, p,
                   stderr_of(p, reps)});
  }
  return out;
}

CoverageResult simulate_coverage(const PriorSpec& prior, const ParamFn& param,
                                 const BvnParams& truth, long n, double level,
                                 long reps, const RngStream& rng,
                                 const CoverageOptions& opts) {
  const std::pair<double, TailSide> target{level, opts.side};
  return simulate_coverage_multi(prior, param, truth, n, {&target, 1}, reps,
                                 rng, opts)[0];
}

double coverage_identity(const PivotalSpec& spec, double level, long mc_reps,
                         const RngStream& rng, const IdentityOptions& opts) {
  check_level(level);
  if (mc_reps < 1) throw std::invalid_argument("coverage_identity: mc_reps >= 1");
  if (opts.inner_draws < 1)
    throw std::invalid_argument("coverage_identity: inner_draws >= 1");
  if (spec.n < 3) throw std::invalid_argument("coverage_identity: n >= 3");
  const double nd = static_cast<double>(spec.n);
  const double nu_a = nd - spec.a;
  const double nu_b = nd - spec.b;
  if (!(nu_a > 0.0) || !(nu_b > 0.0))
    throw std::invalid_argument("coverage_identity: nonpositive degrees of freedom");

  using Which = PivotalSpec::Which;
  const double alpha = 1.0 - level;
  const long inner = opts.inner_draws;
  const bool closed = opts.inner == InnerQuantile::ClosedForm;
  std::function<bool(long)> body;

  switch (spec.which) {
    case Which::RhoIdentity: {
      if (!(std::abs(spec.x) < 1.0))
        throw std::invalid_argument("coverage_identity: |rho| must be < 1");
      const double rho = spec.x;
      const double s = std::sqrt(1.0 - rho * rho);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double z3 = child.normal();
        const double c1 = child.chisq(nd - 1.0);
        const double c2 = child.chisq(nd - 2.0);
        const double v = (s * z3 + rho * std::sqrt(c1)) / std::sqrt(c2);
        thread_local std::vector<double> buf;
        buf.resize(static_cast<std::size_t>(inner));
        for (long j = 0; j < inner; ++j) {
          const double z = child.normal();
          const double ca = child.chisq(nu_a);
          const double cb = child.chisq(nu_b);
          buf[static_cast<std::size_t>(j)] =
              (s * z + rho * std::sqrt(ca)) / std::sqrt(cb);
        }
        return v > empirical_quantile_destructive(buf, alpha);
      };
      break;
    }
    case Which::Eta3Identity: {
      if (!(std::abs(spec.x) < 1.0))
        throw std::invalid_argument("coverage_identity: |rho| must be < 1");
      const double c = spec.x / std::sqrt(1.0 - spec.x * spec.x);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double z3 = child.normal();
        const double c1 = child.chisq(nd - 1.0);
        const double c2 = child.chisq(nd - 2.0);
        const double v = (z3 + c * std::sqrt(c1)) / std::sqrt(c2);
        // the starred quantile conditions on the realized chi^2_{n-1}
        thread_local std::vector<double> buf;
        buf.resize(static_cast<std::size_t>(inner));
        const double shift = c * std::sqrt(c1);
        for (long j = 0; j < inner; ++j) {
          const double z = child.normal();
          const double cb = child.chisq(nu_b);
          buf[static_cast<std::size_t>(j)] = (z + shift) / std::sqrt(cb);
        }
        return v < empirical_quantile_destructive(buf, level);
      };
      break;
    }
    case Which::Theta1Identity: {
      const double scale_fac = std::sqrt((nd - 2.0) / nu_b);
      double q_closed = 0.0;
      if (closed)
        q_closed = boost::math::quantile(boost::math::students_t(nu_b), level);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double z = child.normal();
        const double c2 = child.chisq(nd - 2.0);
        const double t = z / std::sqrt(c2 / (nd - 2.0));
        double q = q_closed;
        if (!closed) {
          thread_local std::vector<double> buf;
          buf.resize(static_cast<std::size_t>(inner));
          for (long j = 0; j < inner; ++j) {
            const double zj = child.normal();
            const double cb = child.chisq(nu_b);
            buf[static_cast<std::size_t>(j)] = zj / std::sqrt(cb / nu_b);
          }
          q = empirical_quantile_destructive(buf, level);
        }
        return t < scale_fac * q;
      };
      break;
    }
    case Which::Theta2Identity: {
      double q_closed = 0.0;
      if (closed)
        q_closed = boost::math::quantile(boost::math::chi_squared(nu_b), alpha);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double c2 = child.chisq(nd - 2.0);
        double q = q_closed;
        if (!closed) {
          thread_local std::vector<double> buf;
          buf.resize(static_cast<std::size_t>(inner));
          for (long j = 0; j < inner; ++j)
            buf[static_cast<std::size_t>(j)] = child.chisq(nu_b);
          q = empirical_quantile_destructive(buf, alpha);
        }
        return c2 > q;
      };
      break;
    }
    case Which::Theta3Identity: {
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double prod = child.chisq(nd - 1.0) * child.chisq(nd - 2.0);
        thread_local std::vector<double> buf;
        buf.resize(static_cast<std::size_t>(inner));
        for (long j = 0; j < inner; ++j)
          buf[static_cast<std::size_t>(j)] =
              child.chisq(nu_a) * child.chisq(nu_b);
        return prod > empirical_quantile_destructive(buf, alpha);
      };
      break;
    }
    case Which::Theta4Identity: {
      double q_closed = 0.0;
      if (closed)
        q_closed = nu_a / nu_b *
                   boost::math::quantile(boost::math::fisher_f(nu_a, nu_b),
                                         level);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double ratio = child.chisq(nd - 1.0) / child.chisq(nd - 2.0);
        double q = q_closed;
        if (!closed) {
          thread_local std::vector<double> buf;
          buf.resize(static_cast<std::size_t>(inner));
          for (long j = 0; j < inner; ++j)
            buf[static_cast<std::size_t>(j)] =
                child.chisq(nu_a) / child.chisq(nu_b);
          q = empirical_quantile_destructive(buf, level);
        }
        return ratio < q;
      };
      break;
    }
    case Which::Theta5Identity: {
      const double delta = spec.x * std::sqrt(nd);
      double q_closed = 0.0;
      if (closed)
        q_closed = boost::math::quantile(
                       boost::math::non_central_t(nu_a, -delta), level) /
                   std::sqrt(nu_a);
      body = [=, &rng](long i) {
        RngStream child = rng.child(static_cast<std::uint64_t>(i));
        const double z1 = child.normal();
        const double c1 = child.chisq(nd - 1.0);
        const double v = (z1 - delta) / std::sqrt(c1);
        double q = q_closed;
        if (!closed) {
          thread_local std::vector<double> buf;
          buf.resize(static_cast<std::size_t>(inner));
          for (long j = 0; j < inner; ++j) {
            const double z = child.normal();
            const double ca = child.chisq(nu_a);
            buf[static_cast<std::size_t>(j)] = (z - delta) / std::sqrt(ca);
          }
          q = empirical_quantile_destructive(buf, level);
        }
        return v < q;
      };
      break;
    }
  }

  const long hits = count_hits(mc_reps, opts.exec, body);
  return static_cast<double>(hits) / static_cast<double>(mc_reps);
}

std::pair<CoverageResult, double> cross_validate(
    double a, double b, const ParamFn& param, double x, long n, double level,
    long reps, const RngStream& rng, const CoverageOptions& cov_opts,
    const IdentityOptions& id_opts) {
  using Tag = ParamFn::Tag;
  using Which = PivotalSpec::Which;
  Which which;
  switch (param.tag) {
    case Tag::Rho: which = Which::RhoIdentity; break;
    case Tag::Eta3: which = Which::Eta3Identity; break;
    case Tag::Theta1: which = Which::Theta1Identity; break;
    case Tag::Theta2: which = Which::Theta2Identity; break;
    case Tag::Theta3: which = Which::Theta3Identity; break;
    case Tag::Theta4: which = Which::Theta4Identity; break;
    case Tag::Theta5: which = Which::Theta5Identity; break;
    default:
      throw std::invalid_argument("cross_validate: no identity for " +
                                  param.name());
  }
  const bool is_theta5 = param.tag == Tag::Theta5;
  if (!is_theta5 && !(std::abs(x) < 1.0))
    throw std::invalid_argument("cross_validate: |rho| must be < 1");
  const BvnParams truth = is_theta5 ? BvnParams(x, 0.0, 1.0, 1.0, 0.0)
                                    : BvnParams(0.0, 0.0, 1.0, 1.0, x);

  CoverageOptions co = cov_opts;
  co.side = TailSide::Upper;
  const CoverageResult cov = simulate_coverage(
      PriorSpec::ab(a, b), param, truth, n, level, reps, rng.child(1), co);
  const PivotalSpec ps{which, a, b, x, n};
  const double ident =
      coverage_identity(ps, level, reps, rng.child(2), id_opts);
  return {cov, ident};
}

std::vector<CoverageResult> rho_scan(const PriorSpec& prior,
                                     const ParamFn& param, long n,
                                     double level,
                                     std::span<const double> rho_grid,
                                     long reps, const RngStream& rng,
                                     SigmaCase sigma_case,
                                     const CoverageOptions& opts) {
  check_level(level);
  const std::pair<double, TailSide> targets[2] = {
      {level, TailSide::Lower}, {level, TailSide::Upper}};
  std::vector<CoverageResult> out;
  out.reserve(rho_grid.size() * 2);
  for (std::size_t gi = 0; gi < rho_grid.size(); ++gi) {
    const double rho = rho_grid[gi];
    if (!(std::abs(rho) < 1.0))
      throw std::invalid_argument("rho_scan: grid must lie inside (-1, 1)");
    const double sigma1 = sigma_case == SigmaCase::A ? 1.0 : 2.0;
    const BvnParams truth(0.0, 0.0, sigma1, 1.0, rho);
    auto cell = simulate_coverage_multi(prior, param, truth, n, targets, reps,
                                        rng.child(gi), opts);
    out.insert(out.end(), cell.begin(), cell.end());
  }
  return out;
}

}  // namespace bvn
