#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/tensor.hpp"

namespace srslab {

enum class PgmFormat { P2, P5 };

// min-max quantization to 0..255; a flat grid maps to all zeros
inline std::vector<std::uint8_t> pgm_quantize(const Tensor& t) {
  if (t.size() == 0) throw std::invalid_argument("cannot quantize an empty grid");
  double lo = t.data[0], hi = t.data[0];
  for (double v : t.data) {
    if (!std::isfinite(v)) throw std::domain_error("grid has non-finite values");
    lo = std::fmin(lo, v);
    hi = std::fmax(hi, v);
  }
  std::vector<std::uint8_t> bytes(t.size());
  if (lo == hi) return bytes;
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < t.size(); ++i) {
    bytes[i] = std::uint8_t(std::lround((t.data[i] - lo) * scale));
  }
  return bytes;
}

inline std::string pgm_encode(const Tensor& t, PgmFormat fmt) {
  std::vector<std::uint8_t> bytes = pgm_quantize(t);
  const std::size_t h = t.rows(), w = t.cols();
  char header[64];
  std::snprintf(header, sizeof header, "%s\n%zu %zu\n255\n", fmt == PgmFormat::P5 ? "P5" : "P2",
                w, h);
  std::string out = header;
  if (fmt == PgmFormat::P5) {
    out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    return out;
  }
  char buf[8];
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      std::snprintf(buf, sizeof buf, j ? " %u" : "%u", unsigned(bytes[i * w + j]));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void write_pgm(const std::string& path, const Tensor& t,
                      PgmFormat fmt = PgmFormat::P5) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::string s = pgm_encode(t, fmt);
  out.write(s.data(), std::streamsize(s.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace srslab
