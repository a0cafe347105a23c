#pragma once

// Dense-layer reverse-mode autodiff: Dense, Act (elementwise activation),
// BatchNorm (1-D), Dropout, and softmax cross-entropy. The tape is caller
// owned; forward fills it, backward consumes it and writes grads into the
// layers. Grad storage is assigned, not accumulated, per backward call.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/activation.hpp"
#include "srslab/rng.hpp"
#include "srslab/tensor.hpp"

namespace srslab {

enum class LayerKind { Dense, Act, BatchNorm, Dropout };
enum class Mode { Train, Eval };

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;

struct Layer {
  LayerKind kind = LayerKind::Dense;

  // Dense
  std::size_t in = 0, out = 0;
  Tensor w, b, gw, gb;

  // Act
  Activation act;
  std::vector<double> act_grad;

  // BatchNorm
  std::size_t features = 0;
  Tensor gamma, beta_bn, g_gamma, g_beta;
  Tensor running_mean, running_var;

  // Dropout
  double rate = 0.0;

  static Layer dense(std::size_t in, std::size_t out) {
    if (in == 0 || out == 0) throw std::invalid_argument("dense layer needs nonzero sizes");
    Layer l;
    l.kind = LayerKind::Dense;
    l.in = in;
    l.out = out;
    l.w = Tensor::zeros({in, out});
    l.b = Tensor::zeros({out});
    l.gw = Tensor::zeros({in, out});
    l.gb = Tensor::zeros({out});
    return l;
  }

  static Layer activation(Activation a) {
    Layer l;
    l.kind = LayerKind::Act;
    l.act = std::move(a);
    l.act_grad.assign(l.act.params.size(), 0.0);
    return l;
  }

  static Layer batchnorm(std::size_t features) {
    if (features == 0) throw std::invalid_argument("batchnorm needs at least one feature");
    Layer l;
    l.kind = LayerKind::BatchNorm;
    l.features = features;
    l.gamma = Tensor::full({features}, 1.0);
    l.beta_bn = Tensor::zeros({features});
    l.g_gamma = Tensor::zeros({features});
    l.g_beta = Tensor::zeros({features});
    l.running_mean = Tensor::zeros({features});
    l.running_var = Tensor::full({features}, 1.0);
    return l;
  }

  static Layer dropout(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0,1)");
    Layer l;
    l.kind = LayerKind::Dropout;
    l.rate = rate;
    return l;
  }
};

struct Model {
  std::vector<Layer> layers;
  Mode mode = Mode::Train;
  bool grads_ready = false;  // set by backward, checked by the optimizer
};

// Uniform handle on one trainable tensor; SGD and the gradient checker walk
// these instead of switching on layer kinds. decay marks tensors that take
// weight decay (dense weights only).
struct ParamView {
  std::string name;
  double* data = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
  bool decay = false;
};

inline std::vector<ParamView> param_views(Model& m) {
  std::vector<ParamView> views;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    Layer& l = m.layers[i];
    std::string prefix = "L" + std::to_string(i) + ".";
    switch (l.kind) {
      case LayerKind::Dense:
        views.push_back({prefix + "w", l.w.data.data(), l.gw.data.data(), l.w.size(), true});
        views.push_back({prefix + "b", l.b.data.data(), l.gb.data.data(), l.b.size(), false});
        break;
      case LayerKind::BatchNorm:
        views.push_back(
            {prefix + "gamma", l.gamma.data.data(), l.g_gamma.data.data(), l.gamma.size(), false});
        views.push_back(
            {prefix + "beta", l.beta_bn.data.data(), l.g_beta.data.data(), l.beta_bn.size(), false});
        break;
      case LayerKind::Act: {
        bool any = false;
        for (bool t : l.act.trainable) any = any || t;
        if (any) {
          views.push_back({prefix + "act", l.act.params.data(), l.act_grad.data(),
                           l.act.params.size(), false});
        }
        break;
      }
      case LayerKind::Dropout:
        break;
    }
  }
  return views;
}

struct LayerTape {
  Tensor y;  // layer output
  // batchnorm intermediates (train mode)
  Tensor xhat;
  std::vector<double> inv_std;
  // dropout mask with the 1/(1-rate) scale folded in
  Tensor mask;
};

struct Tape {
  Tensor x0;  // batch as given to forward
  std::vector<LayerTape> layers;
  bool train = false;
  bool valid = false;
};

namespace detail {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

inline CMap cmap(const Tensor& t) { return CMap(t.data.data(), t.rows(), t.cols()); }
inline MMap mmap(Tensor& t) { return MMap(t.data.data(), t.rows(), t.cols()); }

// Shared by the layer path and the standalone batchnorm_forward op. Train
// mode writes xhat/inv_std into tape (when given) and updates running stats;
// eval mode normalizes by the running stats and touches nothing.
inline void bn_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       Tensor& running_mean, Tensor& running_var, Mode mode, Tensor& y,
                       LayerTape* tape) {
  const std::size_t b = x.rows(), f = x.cols();
  if (gamma.size() != f || beta.size() != f) {
    throw std::invalid_argument("batchnorm parameter length does not match features");
  }
  y.resize2(b, f);
  if (mode == Mode::Train) {
    if (b < 2) throw std::invalid_argument("train-mode batchnorm needs a batch of at least 2");
    if (tape) {
      tape->xhat.resize2(b, f);
      tape->inv_std.resize(f);
    }
    for (std::size_t j = 0; j < f; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < b; ++i) mean += x(i, j);
      mean /= static_cast<double>(b);
      double var = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        double d = x(i, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(b);
      if (var == 0.0) {
        throw std::invalid_argument("zero-variance feature in train-mode batchnorm");
      }
      double inv_std = 1.0 / std::sqrt(var + kBnEps);
      for (std::size_t i = 0; i < b; ++i) {
        double xh = (x(i, j) - mean) * inv_std;
        if (tape) tape->xhat(i, j) = xh;
        y(i, j) = gamma.data[j] * xh + beta.data[j];
      }
      if (tape) tape->inv_std[j] = inv_std;
      double unbiased = var * static_cast<double>(b) / static_cast<double>(b - 1);
      running_mean.data[j] = (1.0 - kBnMomentum) * running_mean.data[j] + kBnMomentum * mean;
      running_var.data[j] = (1.0 - kBnMomentum) * running_var.data[j] + kBnMomentum * unbiased;
    }
  } else {
    for (std::size_t j = 0; j < f; ++j) {
      double inv_std = 1.0 / std::sqrt(running_var.data[j] + kBnEps);
      for (std::size_t i = 0; i < b; ++i) {
        y(i, j) = gamma.data[j] * (x(i, j) - running_mean.data[j]) * inv_std + beta.data[j];
      }
    }
  }
}

}  // namespace detail

struct BnState {
  Tensor running_mean;
  Tensor running_var;
};

inline Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                BnState& state, Mode mode) {
  Tensor y;
  detail::bn_forward(x, gamma, beta, state.running_mean, state.running_var, mode, y, nullptr);
  return y;
}

// Runs the batch through every layer. Dropout masks and stochastic slope
// draws derive from seed alone, so identical (model, batch, seed) calls give
// identical outputs. Train mode mutates only batchnorm running statistics.
inline Tensor forward(Model& m, const Tensor& batch, std::uint64_t seed, Tape& tape) {
  if (batch.rows() < 1 || batch.cols() < 1) throw std::invalid_argument("empty batch");
  Rng rng(seed);
  tape.x0 = batch;
  tape.layers.resize(m.layers.size());
  const Tensor* x = &tape.x0;
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    Layer& l = m.layers[li];
    LayerTape& lt = tape.layers[li];
    Tensor& y = lt.y;
    const std::size_t b = x->rows(), f = x->cols();
    switch (l.kind) {
      case LayerKind::Dense: {
        if (f != l.in) {
          throw std::invalid_argument("dense layer expected width " + std::to_string(l.in) +
                                      ", got " + std::to_string(f));
        }
        y.resize2(b, l.out);
        detail::mmap(y).noalias() = detail::cmap(*x) * detail::cmap(l.w);
        detail::mmap(y).rowwise() +=
            Eigen::Map<const Eigen::RowVectorXd>(l.b.data.data(), l.out);
        break;
      }
      case LayerKind::Act: {
        if (l.act.kind == Act::PReLU && l.act.params.size() != f) {
          throw std::invalid_argument("prelu slope count does not match layer width");
        }
        y.resize2(b, f);
        const bool draw = m.mode == Mode::Train && l.act.stochastic;
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t j = 0; j < f; ++j) {
            double v = (*x)(i, j);
            y(i, j) = draw ? eval(l.act, v, rng, j) : eval(l.act, v, j);
          }
        }
        break;
      }
      case LayerKind::BatchNorm: {
        if (f != l.features) {
          throw std::invalid_argument("batchnorm expected width " + std::to_string(l.features));
        }
        detail::bn_forward(*x, l.gamma, l.beta_bn, l.running_mean, l.running_var, m.mode, y, &lt);
        break;
      }
      case LayerKind::Dropout: {
        y.resize2(b, f);
        if (m.mode == Mode::Train && l.rate > 0.0) {
          lt.mask.resize2(b, f);
          const double scale = 1.0 / (1.0 - l.rate);
          for (std::size_t i = 0; i < y.size(); ++i) {
            lt.mask.data[i] = rng.bernoulli(1.0 - l.rate) ? scale : 0.0;
            y.data[i] = x->data[i] * lt.mask.data[i];
          }
        } else {
          y.data = x->data;
          lt.mask.resize2(b, f);
          lt.mask.fill(1.0);
        }
        break;
      }
    }
    x = &y;
  }
  tape.train = m.mode == Mode::Train;
  tape.valid = true;
  return *x;
}

// Writes d(loss)/d(param) into every layer's grad storage and returns nothing;
// upstream is d(loss)/d(logits). Requires a tape filled by a train-mode
// forward on the same model.
inline void backward(Model& m, const Tape& tape, const Tensor& dlogits) {
  if (!tape.valid) throw std::logic_error("backward without a prior forward");
  if (!tape.train) throw std::logic_error("backward requires a train-mode tape");
  if (tape.layers.size() != m.layers.size()) {
    throw std::logic_error("tape does not match this model");
  }
  const Tensor& top = tape.layers.back().y;
  if (dlogits.rows() != top.rows() || dlogits.cols() != top.cols()) {
    throw std::invalid_argument("upstream gradient shape does not match logits");
  }

  Tensor grad = dlogits;
  Tensor next;
  for (std::size_t li = m.layers.size(); li-- > 0;) {
    Layer& l = m.layers[li];
    const LayerTape& lt = tape.layers[li];
    const Tensor& x = li == 0 ? tape.x0 : tape.layers[li - 1].y;
    const std::size_t b = x.rows(), f = x.cols();
    switch (l.kind) {
      case LayerKind::Dense: {
        detail::mmap(l.gw).noalias() = detail::cmap(x).transpose() * detail::cmap(grad);
        Eigen::Map<Eigen::RowVectorXd>(l.gb.data.data(), l.out) =
            detail::cmap(grad).colwise().sum();
        next.resize2(b, l.in);
        detail::mmap(next).noalias() = detail::cmap(grad) * detail::cmap(l.w).transpose();
        std::swap(grad, next);
        break;
      }
      case LayerKind::Act: {
        next.resize2(b, f);
        switch (l.act.kind) {
          case Act::SRS: {
            double ga = 0.0, gb = 0.0;
            const double alpha = l.act.alpha(), beta = l.act.beta();
            for (std::size_t i = 0; i < x.size(); ++i) {
              SrsTerms t = srs_terms(x.data[i], alpha, beta);
              next.data[i] = grad.data[i] * t.dx;
              ga += grad.data[i] * t.dalpha;
              gb += grad.data[i] * t.dbeta;
            }
            l.act_grad[0] = ga;
            l.act_grad[1] = gb;
            break;
          }
          case Act::PReLU: {
            std::fill(l.act_grad.begin(), l.act_grad.end(), 0.0);
            for (std::size_t i = 0; i < b; ++i) {
              for (std::size_t j = 0; j < f; ++j) {
                double v = x(i, j);
                if (v >= 0.0) {
                  next(i, j) = grad(i, j);
                } else {
                  next(i, j) = grad(i, j) * l.act.params[j];
                  l.act_grad[j] += grad(i, j) * v;
                }
              }
            }
            break;
          }
          case Act::RReLU: {
            if (l.act.stochastic) {
              // recover the drawn slope from the forward pair (y = s*x, x < 0)
              for (std::size_t i = 0; i < x.size(); ++i) {
                double v = x.data[i];
                next.data[i] = grad.data[i] * (v >= 0.0 ? 1.0 : lt.y.data[i] / v);
              }
            } else {
              for (std::size_t i = 0; i < x.size(); ++i) {
                next.data[i] = grad.data[i] * (x.data[i] >= 0.0 ? 1.0 : kRReluMid);
              }
            }
            break;
          }
          default: {
            const bool swish_grad =
                l.act.kind == Act::Swish && !l.act.trainable.empty() && l.act.trainable[0];
            double gsw = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
              next.data[i] = grad.data[i] * eval_dx(l.act, x.data[i]);
              if (swish_grad) gsw += grad.data[i] * eval_dparams(l.act, x.data[i])[0];
            }
            if (swish_grad) l.act_grad[0] = gsw;
            break;
          }
        }
        std::swap(grad, next);
        break;
      }
      case LayerKind::BatchNorm: {
        next.resize2(b, f);
        for (std::size_t j = 0; j < f; ++j) {
          double dg = 0.0, db = 0.0, dot = 0.0;
          for (std::size_t i = 0; i < b; ++i) {
            dg += grad(i, j) * lt.xhat(i, j);
            db += grad(i, j);
          }
          // dxhat = grad * gamma; dot = sum(dxhat * xhat)
          dot = dg * l.gamma.data[j];
          l.g_gamma.data[j] = dg;
          l.g_beta.data[j] = db;
          const double g = l.gamma.data[j];
          const double scale = lt.inv_std[j] / static_cast<double>(b);
          for (std::size_t i = 0; i < b; ++i) {
            next(i, j) =
                scale * (static_cast<double>(b) * grad(i, j) * g - db * g - lt.xhat(i, j) * dot);
          }
        }
        std::swap(grad, next);
        break;
      }
      case LayerKind::Dropout: {
        next.resize2(b, f);
        for (std::size_t i = 0; i < x.size(); ++i) {
          next.data[i] = grad.data[i] * lt.mask.data[i];
        }
        std::swap(grad, next);
        break;
      }
    }
  }
  m.grads_ready = true;
}

struct SceResult {
  double loss = 0.0;
  Tensor dlogits;
};

// Mean cross-entropy over the batch with max-subtracted softmax;
// dlogits = (softmax - onehot) / B.
inline SceResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t b = logits.rows(), c = logits.cols();
  if (labels.size() != b) throw std::invalid_argument("one label per batch row required");
  SceResult r;
  r.dlogits.resize2(b, c);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
      throw std::invalid_argument("label out of range: " + std::to_string(label));
    }
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::fmax(mx, logits(i, j));
    if (!std::isfinite(mx)) throw std::domain_error("logits must be finite");
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(logits(i, j) - mx);
    total += std::log(z) - (logits(i, label) - mx);
    for (std::size_t j = 0; j < c; ++j) {
      double p = std::exp(logits(i, j) - mx) / z;
      r.dlogits(i, j) = (p - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) /
                        static_cast<double>(b);
    }
  }
  r.loss = total / static_cast<double>(b);
  return r;
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;
  double autodiff = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Central-difference check of every trainable tensor, sampling up to
// samples_per_tensor coordinates from each. The error metric is
// |ad - fd| / max(|fd|, 0.01): 1e-5 on that scale means the gradients agree
// to 1e-5 relative with a 1e-7 absolute floor. The same forward seed is
// reused throughout so dropout masks and stochastic draws cancel in the
// differences; batchnorm running stats are restored afterwards.
inline GradCheckResult gradcheck(Model& m, const Tensor& batch, const std::vector<int>& labels,
                                 std::uint64_t seed, int samples_per_tensor = 24,
                                 double h = 1e-5) {
  std::vector<Tensor> saved_mean, saved_var;
  for (Layer& l : m.layers) {
    if (l.kind == LayerKind::BatchNorm) {
      saved_mean.push_back(l.running_mean);
      saved_var.push_back(l.running_var);
    }
  }

  Mode saved_mode = m.mode;
  m.mode = Mode::Train;
  Tape tape;
  Tensor logits = forward(m, batch, seed, tape);
  SceResult sce = softmax_cross_entropy(logits, labels);
  backward(m, tape, sce.dlogits);

  auto loss_at = [&]() {
    Tensor lg = forward(m, batch, seed, tape);
    return softmax_cross_entropy(lg, labels).loss;
  };

  GradCheckResult result;
  Rng pick(seed ^ 0x9e3779b97f4a7c15ull);
  for (ParamView& v : param_views(m)) {
    std::vector<double> ad(v.grad, v.grad + v.size);
    std::vector<std::size_t> coords;
    if (v.size <= static_cast<std::size_t>(samples_per_tensor)) {
      for (std::size_t i = 0; i < v.size; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < samples_per_tensor; ++i) coords.push_back(pick.index(v.size));
    }
    for (std::size_t c : coords) {
      double saved = v.data[c];
      double step = h * std::fmax(1.0, std::fabs(saved));
      v.data[c] = saved + step;
      double up = loss_at();
      v.data[c] = saved - step;
      double down = loss_at();
      v.data[c] = saved;
      double fd = (up - down) / (2.0 * step);
      double err = std::fabs(ad[c] - fd) / std::fmax(std::fabs(fd), 0.01);
      ++result.checked;
      if (err > result.max_rel_err) {
        result.max_rel_err = err;
        result.worst = v.name + "[" + std::to_string(c) + "]";
        result.autodiff = ad[c];
        result.numeric = fd;
      }
    }
  }

  std::size_t bn = 0;
  for (Layer& l : m.layers) {
    if (l.kind == LayerKind::BatchNorm) {
      l.running_mean = saved_mean[bn];
      l.running_var = saved_var[bn];
      ++bn;
    }
  }
  m.mode = saved_mode;
  return result;
}

}  // namespace srslab
