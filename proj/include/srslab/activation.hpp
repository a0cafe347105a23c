#pragma once

// Closed-form activation functions: forward value, input derivative and
// parameter gradients, plus the structural queries specific to the
// soft-root-sign nonlinearity srs(x) = x / (x/alpha + exp(-x/beta)).

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/rng.hpp"

namespace srslab {

enum class Act {
  Identity,  // diagnostic kind, not part of the baseline set
  SRS,
  ReLU,
  LReLU,
  PReLU,
  Softplus,
  ELU,
  SELU,
  Swish,
  Sigmoid,
  Softsign,
  Tanh,
  Hardtanh,
  Mish,
  RReLU,
};

inline constexpr std::array<Act, 15> kAllActs = {
    Act::Identity, Act::SRS,      Act::ReLU,  Act::LReLU,    Act::PReLU,
    Act::Softplus, Act::ELU,      Act::SELU,  Act::Swish,    Act::Sigmoid,
    Act::Softsign, Act::Tanh,     Act::Hardtanh, Act::Mish,  Act::RReLU,
};

inline constexpr double kLReluSlope = 0.2;
inline constexpr double kEluAlpha = 1.0;
inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
// RReLU slope range; the usual (1/8, 1/3) convention.
inline constexpr double kRReluLo = 1.0 / 8.0;
inline constexpr double kRReluHi = 1.0 / 3.0;
inline constexpr double kRReluMid = 0.5 * (kRReluLo + kRReluHi);
// After a parameter update, beta is pulled back to kSrsPoleSlack*alpha*e so the
// denominator of srs stays strictly positive for every real input.
inline constexpr double kSrsPoleSlack = 0.95;
inline constexpr double kDefaultClampFloor = 0.01;

struct Activation {
  Act kind = Act::ReLU;
  std::vector<double> params;    // SRS: {alpha, beta}; PReLU: slope per channel; Swish: {alpha}
  std::vector<bool> trainable;   // aligned with params
  double clamp_floor = kDefaultClampFloor;  // lower bound for SRS parameters
  bool stochastic = false;       // RReLU: draw the negative slope per call

  double alpha() const { return params.at(0); }
  double beta() const { return params.at(1); }

  static Activation srs(double alpha = 5.0, double beta = 3.0) {
    Activation a;
    a.kind = Act::SRS;
    a.params = {alpha, beta};
    a.trainable = {true, true};
    return a;
  }

  static Activation prelu(std::size_t channels = 1, double slope = 0.1) {
    Activation a;
    a.kind = Act::PReLU;
    a.params.assign(channels, slope);
    a.trainable.assign(channels, true);
    return a;
  }

  static Activation swish(double alpha = 1.0, bool trainable_alpha = false) {
    Activation a;
    a.kind = Act::Swish;
    a.params = {alpha};
    a.trainable = {trainable_alpha};
    return a;
  }

  static Activation rrelu(bool stochastic_mode = false) {
    Activation a;
    a.kind = Act::RReLU;
    a.stochastic = stochastic_mode;
    return a;
  }

  static Activation plain(Act kind) {
    switch (kind) {
      case Act::SRS:
        return srs();
      case Act::PReLU:
        return prelu();
      case Act::Swish:
        return swish();
      default: {
        Activation a;
        a.kind = kind;
        return a;
      }
    }
  }
};

inline const char* act_name(Act kind) {
  switch (kind) {
    case Act::Identity: return "identity";
    case Act::SRS: return "srs";
    case Act::ReLU: return "relu";
    case Act::LReLU: return "lrelu";
    case Act::PReLU: return "prelu";
    case Act::Softplus: return "softplus";
    case Act::ELU: return "elu";
    case Act::SELU: return "selu";
    case Act::Swish: return "swish";
    case Act::Sigmoid: return "sigmoid";
    case Act::Softsign: return "softsign";
    case Act::Tanh: return "tanh";
    case Act::Hardtanh: return "hardtanh";
    case Act::Mish: return "mish";
    case Act::RReLU: return "rrelu";
  }
  throw std::invalid_argument("unknown activation kind");
}

inline Act act_from_name(const std::string& name) {
  for (Act k : kAllActs) {
    if (name == act_name(k)) return k;
  }
  throw std::invalid_argument("unknown activation name: " + name);
}

inline bool srs_pole_exists(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("srs parameters must be positive");
  }
  // The denominator x/alpha + exp(-x/beta) attains its minimum
  // (beta/alpha)*(1 - log(beta/alpha)) at x = -beta*log(beta/alpha); the
  // minimum is <= 0 exactly when beta >= alpha*e.
  return beta >= alpha * std::numbers::e;
}

struct SrsShape {
  double min_location;  // -beta
  double min_value;     // alpha*beta / (beta - alpha*e), negative
  double supremum;      // alpha, approached as x -> +inf
};

inline SrsShape srs_shape(double alpha, double beta) {
  if (srs_pole_exists(alpha, beta)) {
    throw std::invalid_argument("srs denominator has a real root (beta >= alpha*e)");
  }
  return {-beta, alpha * beta / (beta - alpha * std::numbers::e), alpha};
}

// Value and all derivatives of srs at one point with a single exp().
// For x <= 0 the closed form is multiplied through by exp(x/beta) so that
// exp(-x/beta) never overflows.
struct SrsTerms {
  double value;
  double dx;
  double dalpha;
  double dbeta;
};

inline SrsTerms srs_terms(double x, double a, double b) {
  if (x > 0.0) {
    double em = std::exp(-x / b);
    if (em == 0.0) {
      // saturated tail; keep the open bound at alpha
      return {std::nextafter(a, 0.0), 0.0, 1.0, 0.0};
    }
    double d = x / a + em;
    double f = x / d;
    if (f >= a) f = std::nextafter(a, 0.0);
    double xa = x / (a * d);
    double xb = x / (b * d);
    return {f, (1.0 + x / b) * em / (d * d), xa * xa, -em * xb * xb};
  }
  double e = std::exp(x / b);
  if (e == 0.0) {
    return {0.0, 0.0, 0.0, 0.0};
  }
  double dw = (x / a) * e + 1.0;  // exp(x/beta)-weighted denominator, >= 1 - beta/(alpha*e) > 0
  double xa = x * e / (a * dw);
  double xb = x / (b * dw);
  return {x * e / dw, (1.0 + x / b) * e / (dw * dw), xa * xa, -(xb * e) * xb};
}

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline void check_input(double x) {
  if (!std::isfinite(x)) throw std::domain_error("activation input must be finite");
}

inline void check_params(const Activation& a) {
  switch (a.kind) {
    case Act::SRS:
      if (a.params.size() != 2) throw std::invalid_argument("srs takes exactly two parameters");
      if (!(a.alpha() > 0.0) || !(a.beta() > 0.0)) {
        throw std::invalid_argument("srs parameters must be positive");
      }
      if (a.beta() >= a.alpha() * std::numbers::e) {
        throw std::invalid_argument("srs denominator has a real root (beta >= alpha*e)");
      }
      break;
    case Act::PReLU:
      if (a.params.empty()) throw std::invalid_argument("prelu needs at least one slope");
      break;
    case Act::Swish:
      if (a.params.size() != 1) throw std::invalid_argument("swish takes exactly one parameter");
      break;
    default:
      if (!a.params.empty()) {
        throw std::invalid_argument(std::string(act_name(a.kind)) + " takes no parameters");
      }
      break;
  }
}

}  // namespace detail

// f(x). For PReLU, `channel` selects the slope. Kinked kinds use the
// right-hand value at the kink. RReLU evaluates with the midpoint slope;
// stochastic draws happen only through the Rng overload below.
inline double eval(const Activation& a, double x, std::size_t channel = 0) {
  detail::check_input(x);
  detail::check_params(a);
  switch (a.kind) {
    case Act::Identity: return x;
    case Act::SRS: return srs_terms(x, a.alpha(), a.beta()).value;
    case Act::ReLU: return x >= 0.0 ? x : 0.0;
    case Act::LReLU: return x >= 0.0 ? x : kLReluSlope * x;
    case Act::PReLU: return x >= 0.0 ? x : a.params.at(channel) * x;
    case Act::Softplus: return detail::softplus(x);
    case Act::ELU: return x >= 0.0 ? x : kEluAlpha * std::expm1(x);
    case Act::SELU: return kSeluLambda * (x >= 0.0 ? x : kSeluAlpha * std::expm1(x));
    case Act::Swish: return x * detail::sigmoid(a.params[0] * x);
    case Act::Sigmoid: return detail::sigmoid(x);
    case Act::Softsign: return x / (1.0 + std::fabs(x));
    case Act::Tanh: return std::tanh(x);
    case Act::Hardtanh: return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
    case Act::Mish: return x * std::tanh(detail::softplus(x));
    case Act::RReLU: return x >= 0.0 ? x : kRReluMid * x;
  }
  throw std::invalid_argument("unknown activation kind");
}

// RReLU stochastic mode: a fresh slope per call from rng. All other kinds
// ignore rng. The draw happens whether or not x is negative so the rng
// stream stays aligned under tiny input perturbations (finite differencing).
inline double eval(const Activation& a, double x, Rng& rng, std::size_t channel = 0) {
  if (a.kind == Act::RReLU && a.stochastic) {
    detail::check_input(x);
    double slope = rng.uniform(kRReluLo, kRReluHi);
    return x >= 0.0 ? x : slope * x;
  }
  return eval(a, x, channel);
}

// df/dx
inline double eval_dx(const Activation& a, double x, std::size_t channel = 0) {
  detail::check_input(x);
  detail::check_params(a);
  switch (a.kind) {
    case Act::Identity: return 1.0;
    case Act::SRS: return srs_terms(x, a.alpha(), a.beta()).dx;
    case Act::ReLU: return x >= 0.0 ? 1.0 : 0.0;
    case Act::LReLU: return x >= 0.0 ? 1.0 : kLReluSlope;
    case Act::PReLU: return x >= 0.0 ? 1.0 : a.params.at(channel);
    case Act::Softplus: return detail::sigmoid(x);
    case Act::ELU: return x >= 0.0 ? 1.0 : kEluAlpha * std::exp(x);
    case Act::SELU: return kSeluLambda * (x >= 0.0 ? 1.0 : kSeluAlpha * std::exp(x));
    case Act::Swish: {
      double s = detail::sigmoid(a.params[0] * x);
      return s + a.params[0] * x * s * (1.0 - s);
    }
    case Act::Sigmoid: {
      double s = detail::sigmoid(x);
      return s * (1.0 - s);
    }
    case Act::Softsign: {
      double d = 1.0 + std::fabs(x);
      return 1.0 / (d * d);
    }
    case Act::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Act::Hardtanh: return (x >= -1.0 && x < 1.0) ? 1.0 : 0.0;
    case Act::Mish: {
      double t = std::tanh(detail::softplus(x));
      return t + x * (1.0 - t * t) * detail::sigmoid(x);
    }
    case Act::RReLU: return x >= 0.0 ? 1.0 : kRReluMid;
  }
  throw std::invalid_argument("unknown activation kind");
}

// df/dparam, ordered as a.params. Empty for parameterless kinds.
inline std::vector<double> eval_dparams(const Activation& a, double x, std::size_t channel = 0) {
  detail::check_input(x);
  detail::check_params(a);
  switch (a.kind) {
    case Act::SRS: {
      SrsTerms t = srs_terms(x, a.alpha(), a.beta());
      return {t.dalpha, t.dbeta};
    }
    case Act::PReLU: {
      std::vector<double> g(a.params.size(), 0.0);
      g.at(channel) = x >= 0.0 ? 0.0 : x;
      return g;
    }
    case Act::Swish: {
      double s = detail::sigmoid(a.params[0] * x);
      return {(x * s) * (x * (1.0 - s))};
    }
    default:
      return {};
  }
}

// Clamp trainable srs parameters to the floor, then pull beta back from the
// pole condition. Call after every parameter update.
inline void project_srs(Activation& a) {
  if (a.kind != Act::SRS) return;
  a.params[0] = std::fmax(a.params[0], a.clamp_floor);
  a.params[1] = std::fmax(a.params[1], a.clamp_floor);
  double cap = kSrsPoleSlack * a.params[0] * std::numbers::e;
  if (a.params[1] > cap) a.params[1] = cap;
}

}  // namespace srslab
