#pragma once

// Training harness: weight initialization schemes, SGD with momentum and
// weight decay plus srs projection, the mlp builder, the experiment runner
// with metric logging, and the ablation grid driver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/dataset.hpp"
#include "srslab/nn.hpp"
#include "srslab/rng.hpp"

namespace srslab {

enum class InitScheme { Gaussian, Xavier, He };

inline const char* init_name(InitScheme s) {
  switch (s) {
    case InitScheme::Gaussian: return "gaussian";
    case InitScheme::Xavier: return "xavier";
    case InitScheme::He: return "he";
  }
  throw std::invalid_argument("unknown init scheme");
}

inline InitScheme init_from_name(const std::string& name) {
  for (InitScheme s : {InitScheme::Gaussian, InitScheme::Xavier, InitScheme::He}) {
    if (name == init_name(s)) return s;
  }
  throw std::invalid_argument("unknown init scheme: " + name);
}

inline constexpr double kGaussianInitStd = 0.1;

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 50;
  int steps = 10'000;
  InitScheme init = InitScheme::Gaussian;
  bool use_bn = false;
  std::uint64_t seed = 1;
  double srs_alpha0 = 3.0;  // dense-network initial values
  double srs_beta0 = 2.0;
  double clamp_floor = kDefaultClampFloor;
  int log_interval = 50;
  int eval_interval = 1000;
  int eval_batch = 1000;
};

inline void check_config(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (cfg.steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (cfg.use_bn && cfg.batch_size < 2) {
    throw std::invalid_argument("batch_size must be at least 2 with batchnorm");
  }
  if (cfg.log_interval < 1 || cfg.eval_interval < 1 || cfg.eval_batch < 1) {
    throw std::invalid_argument("intervals must be positive");
  }
}

// The hidden activation for one experiment arm. srs carries the configured
// initial values; rrelu trains in stochastic mode; swish stays at the fixed
// default slope.
inline Activation hidden_activation(Act kind, const TrainConfig& cfg) {
  switch (kind) {
    case Act::SRS: {
      Activation a = Activation::srs(cfg.srs_alpha0, cfg.srs_beta0);
      a.clamp_floor = cfg.clamp_floor;
      return a;
    }
    case Act::PReLU: return Activation::prelu(1, 0.1);  // resized per layer
    case Act::RReLU: return Activation::rrelu(true);
    default: return Activation::plain(kind);
  }
}

// widths[0] = input features, widths.back() = classes; batchnorm (optional)
// sits right before each hidden activation, and the output layer is linear.
inline Model make_mlp(const std::vector<std::size_t>& widths, const Activation& hidden,
                      bool use_bn) {
  if (widths.size() < 2) throw std::invalid_argument("an mlp needs at least two widths");
  Model m;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    m.layers.push_back(Layer::dense(widths[i], widths[i + 1]));
    if (i + 2 < widths.size()) {
      if (use_bn) m.layers.push_back(Layer::batchnorm(widths[i + 1]));
      Activation a = hidden;
      if (a.kind == Act::PReLU) a = Activation::prelu(widths[i + 1], 0.1);
      m.layers.push_back(Layer::activation(a));
    }
  }
  return m;
}

inline void init_weights(Model& m, InitScheme scheme, std::uint64_t seed, double srs_alpha0 = 3.0,
                         double srs_beta0 = 2.0) {
  Rng rng(seed);
  for (Layer& l : m.layers) {
    switch (l.kind) {
      case LayerKind::Dense: {
        double fan_in = double(l.in), fan_out = double(l.out);
        switch (scheme) {
          case InitScheme::Gaussian:
            for (double& w : l.w.data) w = rng.normal(0.0, kGaussianInitStd);
            break;
          case InitScheme::Xavier: {
            double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (double& w : l.w.data) w = rng.uniform(-bound, bound);
            break;
          }
          case InitScheme::He: {
            double std_dev = std::sqrt(2.0 / fan_in);
            for (double& w : l.w.data) w = rng.normal(0.0, std_dev);
            break;
          }
        }
        l.b.fill(0.0);
        break;
      }
      case LayerKind::BatchNorm:
        l.gamma.fill(1.0);
        l.beta_bn.fill(0.0);
        l.running_mean.fill(0.0);
        l.running_var.fill(1.0);
        break;
      case LayerKind::Act:
        if (l.act.kind == Act::SRS) {
          l.act.params = {srs_alpha0, srs_beta0};
        }
        break;
      case LayerKind::Dropout:
        break;
    }
  }
  m.grads_ready = false;
}

// Momentum SGD over the model's parameter views. Velocity buffers are keyed
// by view order, so the optimizer must stay attached to one model instance.
struct Sgd {
  std::vector<ParamView> views;
  std::vector<std::vector<double>> velocity;
  Model* model = nullptr;

  explicit Sgd(Model& m) : views(param_views(m)), model(&m) {
    velocity.reserve(views.size());
    for (const ParamView& v : views) velocity.emplace_back(v.size, 0.0);
  }

  void step(const TrainConfig& cfg) {
    if (!model->grads_ready) throw std::logic_error("sgd step before any backward pass");
    for (std::size_t vi = 0; vi < views.size(); ++vi) {
      const ParamView& v = views[vi];
      std::vector<double>& vel = velocity[vi];
      const double wd = v.decay ? cfg.weight_decay : 0.0;
      for (std::size_t i = 0; i < v.size; ++i) {
        vel[i] = cfg.momentum * vel[i] - cfg.lr * (v.grad[i] + wd * v.data[i]);
        v.data[i] += vel[i];
      }
    }
    for (Layer& l : model->layers) {
      if (l.kind == LayerKind::Act) project_srs(l.act);
    }
  }
};

// One logging-interval row. pre_act_means (batchnorm or dense outputs feeding
// each hidden activation) are kept for diagnostics but stay out of the CSV.
struct MetricsRecord {
  int step = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double test_err = 1.0;  // latest evaluation, carried forward between evals
  std::vector<double> layer_means;  // post-activation mean per hidden layer
  std::vector<double> pre_act_means;
  std::vector<double> srs_alpha;  // per srs layer, in depth order
  std::vector<double> srs_beta;
};

struct MetricsLog {
  std::vector<MetricsRecord> records;
  std::size_t hidden_layers = 0;
  std::size_t srs_layers = 0;
  double final_test_err = 1.0;
  bool converged = true;
};

inline std::string metrics_to_csv(const MetricsLog& log) {
  std::string out = "step,loss,train_acc,test_err";
  for (std::size_t i = 1; i <= log.hidden_layers; ++i) {
    out += ",layer" + std::to_string(i) + "_mean";
  }
  for (std::size_t i = 1; i <= log.srs_layers; ++i) {
    out += ",alpha" + std::to_string(i) + ",beta" + std::to_string(i);
  }
  out += '\n';
  char buf[64];
  for (const MetricsRecord& r : log.records) {
    out += std::to_string(r.step);
    std::snprintf(buf, sizeof buf, ",%.6f,%.4f,%.4f", r.loss, r.train_acc, r.test_err);
    out += buf;
    for (double m : r.layer_means) {
      std::snprintf(buf, sizeof buf, ",%.6f", m);
      out += buf;
    }
    for (std::size_t i = 0; i < r.srs_alpha.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f", r.srs_alpha[i], r.srs_beta[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// Error rate over a full split, evaluated in chunks so the working set stays
// small. Leaves the model in eval mode only transiently.
inline double evaluate_error(Model& m, const DatasetSplit& data, int chunk) {
  Mode saved = m.mode;
  m.mode = Mode::Eval;
  const std::size_t n = data.inputs.rows(), f = data.inputs.cols();
  std::size_t wrong = 0;
  Tape tape;
  Tensor batch;
  for (std::size_t start = 0; start < n; start += std::size_t(chunk)) {
    std::size_t b = std::min(n - start, std::size_t(chunk));
    batch.resize2(b, f);
    std::copy(data.inputs.data.begin() + start * f, data.inputs.data.begin() + (start + b) * f,
              batch.data.begin());
    Tensor logits = forward(m, batch, 0, tape);
    const std::size_t c = logits.cols();
    for (std::size_t i = 0; i < b; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j) {
        if (logits(i, j) > logits(i, best)) best = j;
      }
      if (int(best) != data.labels[start + i]) ++wrong;
    }
  }
  m.mode = saved;
  return double(wrong) / double(n);
}

namespace detail {

inline double batch_accuracy(const Tensor& logits, const std::vector<int>& labels) {
  std::size_t right = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    if (int(best) == labels[i]) ++right;
  }
  return double(right) / double(logits.rows());
}

}  // namespace detail

// Shuffled mini-batch SGD over the training split with interval logging.
// Divergence (non-finite loss) stops the run early and marks the log.
inline MetricsLog run_experiment(const TrainConfig& cfg, const DatasetSplit& train,
                                 const DatasetSplit& test, const std::vector<std::size_t>& widths,
                                 Act act_kind) {
  check_config(cfg);
  if (train.inputs.cols() != widths.front()) {
    throw std::invalid_argument("dataset width does not match the network input width");
  }

  Model m = make_mlp(widths, hidden_activation(act_kind, cfg), cfg.use_bn);
  init_weights(m, cfg.init, cfg.seed, cfg.srs_alpha0, cfg.srs_beta0);
  m.mode = Mode::Train;
  Sgd opt(m);

  std::vector<std::size_t> act_layers, pre_act_layers, srs_layers;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    if (m.layers[i].kind == LayerKind::Act) {
      act_layers.push_back(i);
      pre_act_layers.push_back(i - 1);  // dense or batchnorm feeding it
      if (m.layers[i].act.kind == Act::SRS) srs_layers.push_back(i);
    }
  }

  MetricsLog log;
  log.hidden_layers = act_layers.size();
  log.srs_layers = srs_layers.size();

  const std::size_t n = train.inputs.rows(), f = train.inputs.cols();
  const std::size_t bsz = std::size_t(cfg.batch_size);
  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order = shuffle_rng.permutation(n);
  std::size_t cursor = 0;

  Tensor batch = Tensor::zeros({bsz, f});
  std::vector<int> labels(bsz);
  Tape tape;
  double latest_test_err = 1.0;
  bool evaluated = false;

  for (int step = 1; step <= cfg.steps; ++step) {
    for (std::size_t i = 0; i < bsz; ++i) {
      if (cursor == n) {
        order = shuffle_rng.permutation(n);
        cursor = 0;
      }
      std::size_t src = order[cursor++];
      std::copy(train.inputs.data.begin() + src * f, train.inputs.data.begin() + (src + 1) * f,
                batch.data.begin() + i * f);
      labels[i] = train.labels[src];
    }

    Tensor logits;
    SceResult sce;
    try {
      logits = forward(m, batch, cfg.seed * 1000003ull + std::uint64_t(step), tape);
      sce = softmax_cross_entropy(logits, labels);
    } catch (const std::domain_error&) {
      // non-finite values reached an activation or the loss: diverged
      log.converged = false;
      break;
    }
    if (!std::isfinite(sce.loss)) {
      log.converged = false;
      break;
    }
    backward(m, tape, sce.dlogits);
    opt.step(cfg);

    bool last = step == cfg.steps;
    if (step % cfg.eval_interval == 0 || last) {
      try {
        latest_test_err = evaluate_error(m, test, cfg.eval_batch);
      } catch (const std::domain_error&) {
        log.converged = false;
        break;
      }
      evaluated = true;
    }
    if (step % cfg.log_interval == 0 || last || step == 1) {
      MetricsRecord r;
      r.step = step;
      r.loss = sce.loss;
      r.train_acc = detail::batch_accuracy(logits, labels);
      r.test_err = latest_test_err;
      for (std::size_t li : act_layers) {
        const Tensor& y = tape.layers[li].y;
        double s = 0.0;
        for (double v : y.data) s += v;
        r.layer_means.push_back(s / double(y.size()));
      }
      for (std::size_t li : pre_act_layers) {
        const Tensor& y = tape.layers[li].y;
        double s = 0.0;
        for (double v : y.data) s += v;
        r.pre_act_means.push_back(s / double(y.size()));
      }
      for (std::size_t li : srs_layers) {
        r.srs_alpha.push_back(m.layers[li].act.alpha());
        r.srs_beta.push_back(m.layers[li].act.beta());
      }
      log.records.push_back(std::move(r));
    }
  }

  if (!evaluated && log.converged) {
    try {
      latest_test_err = evaluate_error(m, test, cfg.eval_batch);
    } catch (const std::domain_error&) {
      log.converged = false;
    }
  }
  log.final_test_err = log.converged ? latest_test_err : 1.0;
  if (log.converged && log.final_test_err >= 0.85) log.converged = false;  // near chance
  return log;
}

struct AblationSetting {
  std::string name;
  double lr = 0.01;
  bool use_bn = false;
  InitScheme init = InitScheme::Gaussian;
};

struct AblationCell {
  bool converged = false;
  double median_test_err = 1.0;  // defined iff converged
};

struct AblationResult {
  std::vector<Act> acts;                  // rows
  std::vector<AblationSetting> settings;  // columns
  std::vector<AblationCell> cells;        // row-major

  const AblationCell& at(std::size_t row, std::size_t col) const {
    return cells.at(row * settings.size() + col);
  }
};

inline constexpr std::uint64_t kAblationSeeds[3] = {1, 2, 3};

// One cell = median test error over the three fixed seeds; a cell where any
// seed diverges is reported unconverged (the published tables print a dash).
inline AblationResult run_ablation(const std::vector<Act>& acts,
                                   const std::vector<AblationSetting>& settings,
                                   const TrainConfig& base, const DatasetSplit& train,
                                   const DatasetSplit& test,
                                   const std::vector<std::size_t>& widths) {
  AblationResult result;
  result.acts = acts;
  result.settings = settings;
  for (Act act : acts) {
    for (const AblationSetting& s : settings) {
      TrainConfig cfg = base;
      cfg.lr = s.lr;
      cfg.use_bn = s.use_bn;
      cfg.init = s.init;
      AblationCell cell;
      std::vector<double> errs;
      bool all_converged = true;
      for (std::uint64_t seed : kAblationSeeds) {
        cfg.seed = seed;
        MetricsLog log = run_experiment(cfg, train, test, widths, act);
        all_converged = all_converged && log.converged;
        errs.push_back(log.final_test_err);
      }
      if (all_converged) {
        std::sort(errs.begin(), errs.end());
        cell.converged = true;
        cell.median_test_err = errs[errs.size() / 2];
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

// Rows per activation, columns per setting, cells as test error percent with
// two decimals; '-' marks unconverged cells like the published tables.
inline std::string ablation_to_csv(const AblationResult& r) {
  std::string out = "model";
  for (const AblationSetting& s : r.settings) {
    out += ',';
    out += s.name;
  }
  out += '\n';
  for (std::size_t row = 0; row < r.acts.size(); ++row) {
    out += act_name(r.acts[row]);
    for (std::size_t col = 0; col < r.settings.size(); ++col) {
      const AblationCell& c = r.at(row, col);
      if (c.converged) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.2f", 100.0 * c.median_test_err);
        out += buf;
      } else {
        out += ",-";
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace srslab
