#pragma once

// Dataset ingestion and synthesis: big-endian IDX image/label files
// (uncompressed) and three seeded 2-D toy generators.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/rng.hpp"
#include "srslab/tensor.hpp"

namespace srslab {

struct DatasetSplit {
  Tensor inputs;            // (N, features)
  std::vector<int> labels;  // length N
  std::string name;
};

namespace detail {

inline std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("truncated idx file: " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

inline DatasetSplit load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open " + images_path);
  if (detail::read_u32_be(img, images_path) != kIdxImageMagic) {
    throw std::runtime_error("bad image magic in " + images_path);
  }
  std::uint32_t n = detail::read_u32_be(img, images_path);
  std::uint32_t rows = detail::read_u32_be(img, images_path);
  std::uint32_t cols = detail::read_u32_be(img, images_path);
  std::size_t features = std::size_t(rows) * cols;

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open " + labels_path);
  if (detail::read_u32_be(lab, labels_path) != kIdxLabelMagic) {
    throw std::runtime_error("bad label magic in " + labels_path);
  }
  std::uint32_t n_labels = detail::read_u32_be(lab, labels_path);
  if (n != n_labels) {
    throw std::runtime_error("image/label count mismatch: " + std::to_string(n) + " vs " +
                             std::to_string(n_labels));
  }

  DatasetSplit d;
  d.inputs = Tensor::zeros({n, features});
  d.labels.resize(n);
  std::vector<unsigned char> buf(features);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(features))) {
      throw std::runtime_error("truncated idx file: " + images_path);
    }
    for (std::size_t j = 0; j < features; ++j) {
      d.inputs(i, j) = buf[j] / 255.0;
    }
  }
  std::vector<unsigned char> lbuf(n);
  if (!lab.read(reinterpret_cast<char*>(lbuf.data()), std::streamsize(n))) {
    throw std::runtime_error("truncated idx file: " + labels_path);
  }
  for (std::uint32_t i = 0; i < n; ++i) d.labels[i] = lbuf[i];
  return d;
}

enum class ToyKind { TwoMoons, Pinwheel, EightGaussians };

inline constexpr int kPinwheelArms = 5;
inline constexpr double kPinwheelRadialStd = 0.3;
inline constexpr double kPinwheelTangentialStd = 0.05;
inline constexpr double kPinwheelRate = 0.25;
inline constexpr double kEightGaussiansRadius = 2.0 * std::numbers::sqrt2;
inline constexpr double kEightGaussiansStd = 0.1;

inline const char* toy_name(ToyKind k) {
  switch (k) {
    case ToyKind::TwoMoons: return "two-moons";
    case ToyKind::Pinwheel: return "pinwheel";
    case ToyKind::EightGaussians: return "eight-gaussians";
  }
  throw std::invalid_argument("unknown toy kind");
}

inline ToyKind toy_from_name(const std::string& name) {
  for (ToyKind k : {ToyKind::TwoMoons, ToyKind::Pinwheel, ToyKind::EightGaussians}) {
    if (name == toy_name(k)) return k;
  }
  throw std::invalid_argument("unknown toy dataset: " + name);
}

inline DatasetSplit gen_toy(ToyKind kind, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("toy dataset needs n >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");
  Rng rng(seed);
  DatasetSplit d;
  d.name = toy_name(kind);
  d.inputs = Tensor::zeros({n, 2});
  d.labels.resize(n);

  switch (kind) {
    case ToyKind::TwoMoons: {
      // two interleaving half-circles; points spaced evenly on each arc,
      // gaussian jitter of scale `noise` on top
      std::size_t n_out = n / 2;
      std::size_t n_in = n - n_out;
      for (std::size_t i = 0; i < n_out; ++i) {
        double t = n_out == 1 ? 0.0 : std::numbers::pi * i / double(n_out - 1);
        d.inputs(i, 0) = std::cos(t);
        d.inputs(i, 1) = std::sin(t);
        d.labels[i] = 0;
      }
      for (std::size_t i = 0; i < n_in; ++i) {
        double t = n_in == 1 ? 0.0 : std::numbers::pi * i / double(n_in - 1);
        d.inputs(n_out + i, 0) = 1.0 - std::cos(t);
        d.inputs(n_out + i, 1) = 0.5 - std::sin(t);
        d.labels[n_out + i] = 1;
      }
      if (noise > 0.0) {
        for (double& v : d.inputs.data) v += noise * rng.normal();
      }
      break;
    }
    case ToyKind::Pinwheel: {
      // radial/tangential gaussian blob per arm, sheared along the spiral
      for (std::size_t i = 0; i < n; ++i) {
        int arm = int(i % kPinwheelArms);
        double r = 1.0 + kPinwheelRadialStd * noise * rng.normal();
        double t = kPinwheelTangentialStd * noise * rng.normal();
        double angle = arm * 2.0 * std::numbers::pi / kPinwheelArms + kPinwheelRate * std::exp(r);
        d.inputs(i, 0) = r * std::cos(angle) - t * std::sin(angle);
        d.inputs(i, 1) = r * std::sin(angle) + t * std::cos(angle);
        d.labels[i] = arm;
      }
      break;
    }
    case ToyKind::EightGaussians: {
      for (std::size_t i = 0; i < n; ++i) {
        int mode = int(i % 8);
        double angle = mode * std::numbers::pi / 4.0;
        d.inputs(i, 0) = kEightGaussiansRadius * std::cos(angle) +
                         kEightGaussiansStd * noise * rng.normal();
        d.inputs(i, 1) = kEightGaussiansRadius * std::sin(angle) +
                         kEightGaussiansStd * noise * rng.normal();
        d.labels[i] = mode;
      }
      break;
    }
  }
  return d;
}

}  // namespace srslab
