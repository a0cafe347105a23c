#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/activation.hpp"
#include "srslab/rng.hpp"
#include "srslab/tensor.hpp"
#include "srslab/train.hpp"

namespace srslab {

struct TrajectoryRecord {
  int iter = 0;
  double x = 0.0;
  double dx = 0.0;  // x_i - x_{i-1}
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Act kind = Act::Identity;
  std::uint64_t seed = 0;
};

// x_i = f(w_i x_{i-1} + b_i) down an explicit chain of scalar weights and
// biases; record i holds x_i and its first difference against x_{i-1}.
inline Trajectory iterate_path(const Activation& act, double x0, const std::vector<double>& w,
                               const std::vector<double>& b) {
  if (w.size() != b.size()) throw std::invalid_argument("weight/bias chains differ in length");
  if (w.size() < 2) throw std::invalid_argument("iteration chain needs at least 2 steps");
  Trajectory t;
  t.kind = act.kind;
  t.records.reserve(w.size());
  double x = x0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double next = eval(act, w[i] * x + b[i]);
    t.records.push_back({int(i) + 1, next, next - x});
    x = next;
  }
  return t;
}

// x0 and each (w_i, b_i) drawn uniform(-1,1); draw order is x0 first, then
// w_i, b_i per iteration.
inline Trajectory iterate_activation(const Activation& act, int iters, std::uint64_t seed) {
  if (iters < 2) throw std::invalid_argument("iterate_activation needs iters >= 2");
  Rng rng(seed);
  double x0 = rng.uniform(-1.0, 1.0);
  const std::size_t n = std::size_t(iters);
  std::vector<double> w(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = rng.uniform(-1.0, 1.0);
    b[i] = rng.uniform(-1.0, 1.0);
  }
  Trajectory t = iterate_path(act, x0, w, b);
  t.seed = seed;
  return t;
}

// mean |dx_i| over the iterations lo..hi inclusive
inline double mean_abs_dx(const Trajectory& t, int lo, int hi) {
  double s = 0.0;
  std::size_t n = 0;
  for (const TrajectoryRecord& r : t.records) {
    if (r.iter < lo || r.iter > hi) continue;
    s += std::fabs(r.dx);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("iteration window misses every record");
  return s / double(n);
}

inline std::string trajectory_to_csv(const Trajectory& t) {
  std::string out = "iter,x,dx\n";
  char buf[96];
  for (const TrajectoryRecord& r : t.records) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", r.iter, r.x, r.dx);
    out += buf;
  }
  return out;
}

struct LandscapeExtent {
  double x_min = -6.0, x_max = 6.0;
  double y_min = -6.0, y_max = 6.0;
};

struct Landscape {
  Tensor grid;  // (h, w), row i sweeps y, column j sweeps x
  LandscapeExtent extent;
  std::uint64_t seed = 0;
  Act kind = Act::Identity;
};

inline constexpr std::size_t kLandscapeWidths[6] = {2, 64, 64, 64, 64, 1};

// The 5-layer scalar-output network the landscapes sample: 2-64-64-64-64-1,
// Xavier init, the given activation after each hidden layer.
inline Model landscape_model(const Activation& act, std::uint64_t seed) {
  std::vector<std::size_t> widths(std::begin(kLandscapeWidths), std::end(kLandscapeWidths));
  Model m = make_mlp(widths, act, false);
  double a0 = act.kind == Act::SRS ? act.alpha() : 3.0;
  double b0 = act.kind == Act::SRS ? act.beta() : 2.0;
  init_weights(m, InitScheme::Xavier, seed, a0, b0);
  m.mode = Mode::Eval;
  return m;
}

inline Landscape landscape_from_model(Model& m, std::size_t h, std::size_t w,
                                      const LandscapeExtent& e) {
  if (h < 2 || w < 2) throw std::invalid_argument("landscape grid needs h, w >= 2");
  if (!(std::isfinite(e.x_min) && std::isfinite(e.x_max) && std::isfinite(e.y_min) &&
        std::isfinite(e.y_max))) {
    throw std::invalid_argument("landscape extent must be finite");
  }
  Landscape ls;
  ls.grid = Tensor::zeros({h, w});
  ls.extent = e;
  Mode saved = m.mode;
  m.mode = Mode::Eval;
  Tensor row = Tensor::zeros({w, 2});
  Tape tape;
  for (std::size_t i = 0; i < h; ++i) {
    double y = e.y_min + (e.y_max - e.y_min) * double(i) / double(h - 1);
    for (std::size_t j = 0; j < w; ++j) {
      row(j, 0) = e.x_min + (e.x_max - e.x_min) * double(j) / double(w - 1);
      row(j, 1) = y;
    }
    Tensor out = forward(m, row, 0, tape);
    for (std::size_t j = 0; j < w; ++j) ls.grid(i, j) = out(j, 0);
  }
  m.mode = saved;
  return ls;
}

inline Landscape output_landscape(const Activation& act, std::size_t h, std::size_t w,
                                  const LandscapeExtent& e, std::uint64_t seed) {
  Model m = landscape_model(act, seed);
  Landscape ls = landscape_from_model(m, h, w, e);
  ls.seed = seed;
  ls.kind = act.kind;
  return ls;
}

// Mean squared 5-point Laplacian over interior cells, on the grid normalized
// to zero mean and unit variance; the mean shift cancels inside the stencil,
// so only the 1/sigma scale is applied. Flat grids (and grids with no
// interior) score 0.
inline double landscape_roughness(const Landscape& ls) {
  const Tensor& g = ls.grid;
  const std::size_t h = g.rows(), w = g.cols();
  double mu = 0.0;
  for (double v : g.data) {
    if (!std::isfinite(v)) throw std::domain_error("landscape grid has non-finite values");
    mu += v;
  }
  mu /= double(g.size());
  double var = 0.0;
  for (double v : g.data) var += (v - mu) * (v - mu);
  var /= double(g.size());
  if (var == 0.0 || h < 3 || w < 3) return 0.0;
  const double inv = 1.0 / std::sqrt(var);
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < h; ++i) {
    for (std::size_t j = 1; j + 1 < w; ++j) {
      double lap = g(i - 1, j) + g(i + 1, j) + g(i, j - 1) + g(i, j + 1) - 4.0 * g(i, j);
      lap *= inv;
      sum += lap * lap;
    }
  }
  return sum / double((h - 2) * (w - 2));
}

inline std::string landscape_to_csv(const Landscape& ls) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < ls.grid.rows(); ++i) {
    for (std::size_t j = 0; j < ls.grid.cols(); ++j) {
      std::snprintf(buf, sizeof buf, j ? ",%.10g" : "%.10g", ls.grid(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace srslab
