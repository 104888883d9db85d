#include "bvn/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace bvn {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ScaleParams::ScaleParams(double sigma1_, double sigma2_, double rho_)
    : sigma1(sigma1_), sigma2(sigma2_), rho(rho_) {
  require(finite(sigma1) && sigma1 > 0.0, "ScaleParams: sigma1 must be positive");
  require(finite(sigma2) && sigma2 > 0.0, "ScaleParams: sigma2 must be positive");
  require(finite(rho) && std::abs(rho) < 1.0, "ScaleParams: |rho| must be < 1");
}

BvnParams::BvnParams(double mu1_, double mu2_, double sigma1_, double sigma2_,
                     double rho_)
    : mu1(mu1_), mu2(mu2_), sigma1(sigma1_), sigma2(sigma2_), rho(rho_) {
  require(finite(mu1) && finite(mu2), "BvnParams: means must be finite");
  require(finite(sigma1) && sigma1 > 0.0, "BvnParams: sigma1 must be positive");
  require(finite(sigma2) && sigma2 > 0.0, "BvnParams: sigma2 must be positive");
  require(finite(rho) && std::abs(rho) < 1.0, "BvnParams: |rho| must be < 1");
}

EtaParams::EtaParams(double eta1_, double eta2_, double eta3_)
    : eta1(eta1_), eta2(eta2_), eta3(eta3_) {
  require(finite(eta1) && eta1 > 0.0, "EtaParams: eta1 must be positive");
  require(finite(eta2) && eta2 > 0.0, "EtaParams: eta2 must be positive");
  require(finite(eta3), "EtaParams: eta3 must be finite");
}

SuffStats::SuffStats(long n_, double xbar1_, double xbar2_, double s11_,
                     double s22_, double r_)
    : n(n_), xbar1(xbar1_), xbar2(xbar2_), s11(s11_), s22(s22_), r(r_) {
  if (n < 3) throw DegenerateDataError("degenerate data: n < 3");
  if (!(finite(s11) && s11 > 0.0))
    throw DegenerateDataError("degenerate data: s11 <= 0 (constant first coordinate)");
  if (!(finite(s22) && s22 > 0.0))
    throw DegenerateDataError("degenerate data: s22 <= 0 (constant second coordinate)");
  if (!(finite(r) && std::abs(r) < 1.0 - kDegenerateRhoTol))
    throw DegenerateDataError("degenerate data: |r| = 1 (collinear sample)");
  if (!(finite(xbar1) && finite(xbar2)))
    throw DegenerateDataError("degenerate data: non-finite means");
}

ParamFn ParamFn::d_mean(double d1, double d2) {
  ParamFn f(Tag::DMean);
  f.d1 = d1;
  f.d2 = d2;
  return f;
}

ParamFn ParamFn::d_var(double d1, double d2) {
  // d proportional to (0, 1) makes d'Sigma d a function of sigma2 alone,
  // which the variance rows do not cover.
  require(d1 != 0.0, "ParamFn: DVar requires d not proportional to (0, 1)");
  ParamFn f(Tag::DVar);
  f.d1 = d1;
  f.d2 = d2;
  return f;
}

bool ParamFn::needs_means() const {
  switch (tag) {
    case Tag::Mu1:
    case Tag::Mu2:
    case Tag::MuDiff:
    case Tag::Theta5:
    case Tag::Theta8:
    case Tag::DMean:
      return true;
    default:
      return false;
  }
}

namespace {

const std::map<std::string, ParamFn::Tag>& tag_names() {
  static const std::map<std::string, ParamFn::Tag> names = {
      {"mu1", ParamFn::Tag::Mu1},         {"mu2", ParamFn::Tag::Mu2},
      {"mu-diff", ParamFn::Tag::MuDiff},  {"sigma1", ParamFn::Tag::Sigma1},
      {"sigma2", ParamFn::Tag::Sigma2},   {"rho", ParamFn::Tag::Rho},
      {"eta1", ParamFn::Tag::Eta1},       {"eta2", ParamFn::Tag::Eta2},
      {"eta3", ParamFn::Tag::Eta3},       {"theta1", ParamFn::Tag::Theta1},
      {"theta2", ParamFn::Tag::Theta2},   {"theta3", ParamFn::Tag::Theta3},
      {"theta4", ParamFn::Tag::Theta4},   {"theta5", ParamFn::Tag::Theta5},
      {"theta6", ParamFn::Tag::Theta6},   {"theta7", ParamFn::Tag::Theta7},
      {"theta8", ParamFn::Tag::Theta8},   {"theta9", ParamFn::Tag::Theta9},
      {"theta10", ParamFn::Tag::Theta10}, {"lambda1", ParamFn::Tag::Lambda1},
      {"lambda2", ParamFn::Tag::Lambda2},
  };
  return names;
}

std::string g_format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

std::string ParamFn::name() const {
  for (const auto& [text, t] : tag_names())
    if (t == tag) return text;
  const char* head = tag == Tag::DMean ? "dmean" : "dvar";
  return std::string(head) + ":" + g_format(d1) + ":" + g_format(d2);
}

ParamFn ParamFn::parse(const std::string& text) {
  auto it = tag_names().find(text);
  if (it != tag_names().end()) return ParamFn(it->second);
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 != std::string::npos && c2 != std::string::npos) {
    const std::string head = text.substr(0, c1);
    char* end1 = nullptr;
    char* end2 = nullptr;
    const std::string a = text.substr(c1 + 1, c2 - c1 - 1);
    const std::string b = text.substr(c2 + 1);
    const double d1 = std::strtod(a.c_str(), &end1);
    const double d2 = std::strtod(b.c_str(), &end2);
    const bool ok = !a.empty() && !b.empty() && end1 && *end1 == '\0' &&
                    end2 && *end2 == '\0';
    if (ok && head == "dmean") return d_mean(d1, d2);
    if (ok && head == "dvar") return d_var(d1, d2);
  }
  throw std::invalid_argument("unknown parameter name: " + text);
}

double psi(double y) {
  double v;
  if (std::abs(y) > 1.0) {
    // y*y may overflow to inf; 1/inf = 0 keeps the limit right
    v = std::copysign(1.0 / std::sqrt(1.0 + 1.0 / (y * y)), y);
  } else {
    v = y / std::sqrt(1.0 + y * y);
  }
  const double max_rho = std::nextafter(1.0, 0.0);
  return std::clamp(v, -max_rho, max_rho);
}

EtaParams eta_from_sigma(const ScaleParams& s) {
  const double root = std::sqrt(1.0 - s.rho * s.rho);
  return {1.0 / s.sigma1, 1.0 / (s.sigma2 * root),
          -s.rho / (s.sigma1 * root)};
}

ScaleParams sigma_from_eta(const EtaParams& e) {
  const double norm = std::hypot(e.eta1, e.eta3);
  return {1.0 / e.eta1, norm / (e.eta1 * e.eta2), psi(-e.eta3 / e.eta1)};
}

double param_value(double mu1, double mu2, double s1, double s2, double rho,
                   const ParamFn& f) {
  using Tag = ParamFn::Tag;
  switch (f.tag) {
    case Tag::Mu1: return mu1;
    case Tag::Mu2: return mu2;
    case Tag::MuDiff: return mu1 - mu2;
    case Tag::Sigma1: return s1;
    case Tag::Sigma2: return s2;
    case Tag::Rho: return rho;
    case Tag::Eta1: return 1.0 / s1;
    case Tag::Eta2: return 1.0 / (s2 * std::sqrt(1.0 - rho * rho));
    case Tag::Eta3: return -rho / (s1 * std::sqrt(1.0 - rho * rho));
    case Tag::Theta1: return rho * s2 / s1;
    case Tag::Theta2: return s2 * s2 * (1.0 - rho * rho);
    case Tag::Theta3: return s1 * s1 * s2 * s2 * (1.0 - rho * rho);
    case Tag::Theta4: return s2 * std::sqrt(1.0 - rho * rho) / s1;
    case Tag::Theta5: return mu1 / s1;
    case Tag::Theta6: return s1 * s1 * s2 * s2;
    case Tag::Theta7: return s2 / s1;
    case Tag::Theta8: return mu2 / s2;
    case Tag::Theta9: return rho * s1 * s2;
    case Tag::Theta10: return s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2;
    case Tag::Lambda1:
    case Tag::Lambda2: {
      // closed 2x2 form: ((tr +- sqrt((s1^2-s2^2)^2 + 4 rho^2 s1^2 s2^2))/2
      const double v1 = s1 * s1, v2 = s2 * s2;
      const double diff = v1 - v2;
      const double disc = std::sqrt(diff * diff + 4.0 * rho * rho * v1 * v2);
      return f.tag == Tag::Lambda1 ? 0.5 * (v1 + v2 + disc)
                                   : 0.5 * (v1 + v2 - disc);
    }
    case Tag::DMean: return f.d1 * mu1 + f.d2 * mu2;
    case Tag::DVar:
      return f.d1 * f.d1 * s1 * s1 + 2.0 * f.d1 * f.d2 * rho * s1 * s2 +
             f.d2 * f.d2 * s2 * s2;
  }
  throw std::logic_error("param_value: unhandled tag");
}

double param_value(const BvnParams& p, const ParamFn& f) {
  return param_value(p.mu1, p.mu2, p.sigma1, p.sigma2, p.rho, f);
}

SuffStats suff_stats(std::span<const std::pair<double, double>> data) {
  const long n = static_cast<long>(data.size());
  if (n < 3) throw DegenerateDataError("degenerate data: n < 3");
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [x1, x2] : data) {
    m1 += x1;
    m2 += x2;
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (const auto& [x1, x2] : data) {
    const double d1 = x1 - m1, d2 = x2 - m2;
    s11 += d1 * d1;
    s22 += d2 * d2;
    s12 += d1 * d2;
  }
  if (!(s11 > 0.0))
    throw DegenerateDataError("degenerate data: s11 <= 0 (constant first coordinate)");
  if (!(s22 > 0.0))
    throw DegenerateDataError("degenerate data: s22 <= 0 (constant second coordinate)");
  const double r = s12 / std::sqrt(s11 * s22);
  return {n, m1, m2, s11, s22, r};
}

std::vector<std::pair<double, double>> sample_bvn(const BvnParams& p, long n,
                                                  RngStream& rng) {
  require(n >= 1, "sample_bvn: n must be >= 1");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  const double root = std::sqrt(1.0 - p.rho * p.rho);
  for (long i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    out.emplace_back(p.mu1 + p.sigma1 * z1,
                     p.mu2 + p.sigma2 * (p.rho * z1 + root * z2));
  }
  return out;
}

double log_marginal_likelihood(const SuffStats& st, const ScaleParams& sc) {
  const double v1 = sc.sigma1 * sc.sigma1, v2 = sc.sigma2 * sc.sigma2;
  const double one_m_rho2 = 1.0 - sc.rho * sc.rho;
  const double log_det = std::log(v1) + std::log(v2) + std::log(one_m_rho2);
  const double s12 = st.r * std::sqrt(st.s11 * st.s22);
  const double trace =
      (st.s11 / v1 + st.s22 / v2 -
       2.0 * sc.rho * s12 / (sc.sigma1 * sc.sigma2)) /
      one_m_rho2;
  return -0.5 * static_cast<double>(st.n - 1) * log_det - 0.5 * trace;
}

}  // namespace bvn
