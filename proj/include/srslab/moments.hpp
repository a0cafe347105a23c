#pragma once

// Mean and variance of an activation under standard-normal input:
// mean = E[f(X)], variance = E[f(X)^2] - mean^2 with X ~ N(0,1), evaluated by
// composite quadrature on [-T, T]. srs cells with beta >= alpha*e are flagged
// Divergent analytically before any integration.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/activation.hpp"
#include "srslab/rng.hpp"

namespace srslab {

enum class MomentStatus { Convergent, Divergent };

struct MomentResult {
  MomentStatus status = MomentStatus::Convergent;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();
  // max absolute change in (mean, variance) when recomputed at panels/2
  double quadrature_error_estimate = 0.0;
};

enum class QuadRule { GaussLegendre, Simpson };

struct QuadratureConfig {
  double truncation = 12.0;  // integrate over [-T, T]
  int panels = 2048;
  QuadRule rule = QuadRule::GaussLegendre;
};

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline void check_quadrature(const QuadratureConfig& cfg) {
  if (!(cfg.truncation > 0.0)) throw std::invalid_argument("truncation must be positive");
  if (cfg.panels < 16) throw std::invalid_argument("panels must be at least 16");
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int order) {
  GaussRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      double step = p1 / dp;
      x -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[order - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[order - 1 - i] = w;
  }
  return r;
}

struct MomentPair {
  double first;   // E[f]
  double second;  // E[f^2]
};

template <class F>
MomentPair integrate(F&& f, const QuadratureConfig& cfg, int panels) {
  const double t = cfg.truncation;
  const double width = 2.0 * t / panels;
  double s1 = 0.0, s2 = 0.0;
  if (cfg.rule == QuadRule::GaussLegendre) {
    static const GaussRule rule = gauss_legendre(8);
    for (int p = 0; p < panels; ++p) {
      double a = -t + p * width;
      double c = a + 0.5 * width;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x = c + 0.5 * width * rule.nodes[i];
        double v = f(x);
        double w = 0.5 * width * rule.weights[i] * normal_pdf(x);
        s1 += w * v;
        s2 += w * v * v;
      }
    }
  } else {
    for (int p = 0; p < panels; ++p) {
      double a = -t + p * width;
      double m = a + 0.5 * width;
      double b = a + width;
      double va = f(a), vm = f(m), vb = f(b);
      double wa = normal_pdf(a), wm = normal_pdf(m), wb = normal_pdf(b);
      s1 += width / 6.0 * (va * wa + 4.0 * vm * wm + vb * wb);
      s2 += width / 6.0 * (va * va * wa + 4.0 * vm * vm * wm + vb * vb * wb);
    }
  }
  return {s1, s2};
}

}  // namespace detail

inline MomentResult moments(const Activation& act, const QuadratureConfig& cfg = {}) {
  detail::check_quadrature(cfg);
  if (act.kind == Act::SRS && srs_pole_exists(act.alpha(), act.beta())) {
    MomentResult r;
    r.status = MomentStatus::Divergent;
    return r;
  }
  auto f = [&](double x) { return eval(act, x); };
  detail::MomentPair full = detail::integrate(f, cfg, cfg.panels);
  detail::MomentPair half = detail::integrate(f, cfg, cfg.panels / 2);
  MomentResult r;
  r.status = MomentStatus::Convergent;
  r.mean = full.first;
  r.variance = full.second - full.first * full.first;
  double half_var = half.second - half.first * half.first;
  r.quadrature_error_estimate =
      std::fmax(std::fabs(full.first - half.first), std::fabs(r.variance - half_var));
  return r;
}

struct McResult {
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;      // sample std / sqrt(n)
  double stderr_variance = 0.0;  // sqrt((m4 - m2^2) / n)
};

inline McResult mc_oracle(const Activation& act, std::uint64_t n, std::uint64_t seed) {
  if (n < 10'000) throw std::invalid_argument("mc_oracle needs n >= 10000");
  if (act.kind == Act::SRS && srs_pole_exists(act.alpha(), act.beta())) {
    throw std::domain_error("moments diverge: srs denominator has a real root");
  }
  Rng rng(seed);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    double v = eval(act, rng.normal());
    double v2 = v * v;
    s1 += v;
    s2 += v2;
    s3 += v2 * v;
    s4 += v2 * v2;
  }
  double dn = static_cast<double>(n);
  double mean = s1 / dn;
  double m2 = s2 / dn - mean * mean;
  double m4 = s4 / dn - 4.0 * mean * s3 / dn + 6.0 * mean * mean * s2 / dn -
              3.0 * mean * mean * mean * mean;
  McResult r;
  r.mean = mean;
  r.variance = m2 * dn / (dn - 1.0);
  r.stderr_mean = std::sqrt(m2 / dn);
  r.stderr_variance = std::sqrt(std::fmax(m4 - m2 * m2, 0.0) / dn);
  return r;
}

struct MomentTable {
  std::vector<double> alphas;               // column labels
  std::vector<double> betas;                // row labels
  std::vector<MomentResult> cells;          // row-major, betas.size() x alphas.size()

  const MomentResult& at(std::size_t beta_i, std::size_t alpha_i) const {
    return cells.at(beta_i * alphas.size() + alpha_i);
  }
};

inline MomentTable moments_table(const std::vector<double>& alphas,
                                 const std::vector<double>& betas,
                                 const QuadratureConfig& cfg = {}) {
  detail::check_quadrature(cfg);
  for (double a : alphas) {
    if (!(a > 0.0)) throw std::invalid_argument("alpha grid values must be positive");
  }
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("beta grid values must be positive");
  }
  MomentTable t;
  t.alphas = alphas;
  t.betas = betas;
  t.cells.reserve(alphas.size() * betas.size());
  for (double b : betas) {
    for (double a : alphas) {
      t.cells.push_back(moments(Activation::srs(a, b), cfg));
    }
  }
  return t;
}

namespace detail {

inline std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

// Grid layout: header row of alpha values, first column beta, cells
// "mean (variance)" with four decimals and a literal x for divergent cells.
inline std::string format_moments_csv(const MomentTable& t) {
  std::string out = "beta";
  for (double a : t.alphas) {
    out += ',';
    out += detail::trim_number(a);
  }
  out += '\n';
  for (std::size_t bi = 0; bi < t.betas.size(); ++bi) {
    out += detail::trim_number(t.betas[bi]);
    for (std::size_t ai = 0; ai < t.alphas.size(); ++ai) {
      const MomentResult& c = t.at(bi, ai);
      out += ',';
      if (c.status == MomentStatus::Divergent) {
        out += 'x';
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f (%.4f)", c.mean, c.variance);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace srslab
