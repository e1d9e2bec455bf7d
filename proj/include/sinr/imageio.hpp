#pragma once

// Netpbm (PGM/PPM) codecs and the image <-> training-set mapping.
//
// Pixel levels u in [0, maxval] map to 2u/maxval - 1 in [-1, 1]. Pixel (col i,
// row j) of a W x H image sits at x = -1 + (2i+1)/W, y = -1 + (2j+1)/H, so no
// sample lands on the periodic seam at +-1.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sinr/errors.hpp"
#include "sinr/net.hpp"

namespace sinr {

struct ImageGrid {
  int width = 0;
  int height = 0;
  int channels = 1;          // 1 or 3
  std::vector<double> data;  // row-major, interleaved channels

  double& at(int row, int col, int c = 0) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + c];
  }
  double at(int row, int col, int c = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + c];
  }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

  void validate() const {
    if (width < 1 || height < 1) throw DimensionError("image dimensions must be positive");
    if (channels != 1 && channels != 3) throw DimensionError("image must have 1 or 3 channels");
    if (data.size() != pixels() * channels) throw DimensionError("image data length mismatch");
    for (double v : data)
      if (!(v >= -1.0 && v <= 1.0)) throw DomainError("image values must lie in [-1, 1]");
  }
};

namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      break;
    }
  }
  while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#') tok.push_back(static_cast<char>(in.get()));
  if (tok.empty()) throw IoError("malformed PNM header: unexpected end of file");
  return tok;
}

inline long pnm_int(std::istream& in, const char* what) {
  const std::string t = pnm_token(in);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw IoError(std::string("malformed PNM header: bad ") + what + " '" + t + "'");
  if (t.size() > 9) throw IoError(std::string("malformed PNM header: ") + what + " too large");
  return std::stol(t);
}

}  // namespace detail

inline ImageGrid read_pnm(std::istream& in) {
  const std::string magic = detail::pnm_token(in);
  int channels;
  bool binary;
  if (magic == "P2") channels = 1, binary = false;
  else if (magic == "P5") channels = 1, binary = true;
  else if (magic == "P3") channels = 3, binary = false;
  else if (magic == "P6") channels = 3, binary = true;
  else throw IoError("unsupported PNM magic '" + magic + "'");
  const long w = detail::pnm_int(in, "width");
  const long h = detail::pnm_int(in, "height");
  const long maxval = detail::pnm_int(in, "maxval");
  if (w < 1 || h < 1) throw IoError("malformed PNM header: zero dimension");
  if (maxval < 1 || maxval > 65535) throw IoError("malformed PNM header: maxval out of range");
  ImageGrid g;
  g.width = static_cast<int>(w);
  g.height = static_cast<int>(h);
  g.channels = channels;
  const std::size_t n = g.pixels() * channels;
  g.data.resize(n);
  const double scale = 2.0 / static_cast<double>(maxval);
  auto level = [&](long u) {
    if (u < 0 || u > maxval) throw IoError("pixel value exceeds maxval");
    return scale * static_cast<double>(u) - 1.0;
  };
  if (binary) {
    in.get();  // single whitespace after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(n * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated PNM payload");
    for (std::size_t i = 0; i < n; ++i) {
      const long u = bytes == 1 ? buf[i] : (static_cast<long>(buf[2 * i]) << 8) | buf[2 * i + 1];
      g.data[i] = level(u);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      long u;
      try {
        u = detail::pnm_int(in, "pixel");
      } catch (const IoError&) {
        throw IoError("truncated or malformed PNM payload");
      }
      g.data[i] = level(u);
    }
  }
  return g;
}

inline ImageGrid read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pnm(in);
}

/// Binary PGM (1 channel) or PPM (3 channels). Values are rounded to the
/// nearest level; values outside [-1, 1] are clipped.
inline void write_pnm(const ImageGrid& g, std::ostream& out, int maxval = 255) {
  if (g.width < 1 || g.height < 1 || (g.channels != 1 && g.channels != 3) ||
      g.data.size() != g.pixels() * g.channels)
    throw DimensionError("invalid image grid");
  if (maxval < 1 || maxval > 65535) throw PreconditionError("maxval out of range");
  out << (g.channels == 1 ? "P5" : "P6") << '\n' << g.width << ' ' << g.height << '\n' << maxval << '\n';
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> buf(g.data.size() * bytes);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    const double v = std::clamp(g.data[i], -1.0, 1.0);
    const auto u = static_cast<long>(std::lround((v + 1.0) * 0.5 * maxval));
    if (bytes == 1) {
      buf[i] = static_cast<unsigned char>(u);
    } else {
      buf[2 * i] = static_cast<unsigned char>(u >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(u & 0xff);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void write_pnm(const ImageGrid& g, const std::string& path, int maxval = 255) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_pnm(g, out, maxval);
  if (!out) throw IoError("write failed: " + path);
}

/// Grayscale image from values in [0, 1] (row-major, width x height).
inline ImageGrid unit_image(const std::vector<double>& v, int width, int height) {
  ImageGrid g;
  g.width = width;
  g.height = height;
  g.channels = 1;
  g.data.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) g.data[i] = 2.0 * std::clamp(v[i], 0.0, 1.0) - 1.0;
  return g;
}

/// Training set of an image: coords (N x 2, columns x then y) and values
/// (N x channels), N = width * height in row-major pixel order.
struct Dataset {
  MatrixXd coords;
  MatrixXd values;
  int width = 0;
  int height = 0;
};

inline double pixel_center(int i, int n) { return -1.0 + (2.0 * i + 1.0) / n; }

inline Dataset to_dataset(const ImageGrid& g, double period = 2.0) {
  g.validate();
  if (period < 2.0) throw PreconditionError("period must be at least 2 to hold [-1, 1]");
  Dataset ds;
  ds.width = g.width;
  ds.height = g.height;
  const auto n = static_cast<Eigen::Index>(g.pixels());
  ds.coords.resize(n, 2);
  ds.values.resize(n, g.channels);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const Eigen::Index i = static_cast<Eigen::Index>(r) * g.width + c;
      ds.coords(i, 0) = pixel_center(c, g.width);
      ds.coords(i, 1) = pixel_center(r, g.height);
      for (int ch = 0; ch < g.channels; ++ch) ds.values(i, ch) = g.at(r, c, ch);
    }
  return ds;
}

/// Image from per-pixel values (N x channels, row-major pixel order).
inline ImageGrid from_values(const MatrixXd& values, int width, int height) {
  if (values.rows() != static_cast<Eigen::Index>(width) * height)
    throw DimensionError("value count does not match image size");
  ImageGrid g;
  g.width = width;
  g.height = height;
  g.channels = static_cast<int>(values.cols());
  g.data.resize(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      g.data[static_cast<std::size_t>(i * values.cols() + c)] = std::clamp(values(i, c), -1.0, 1.0);
  return g;
}

/// Seeded test image: a random real Fourier series over period 2 with every
/// frequency F, ||F||_inf <= band, amplitude ~ N(0,1) / (1 + |F|)^decay,
/// sampled at pixel centers and scaled to peak magnitude `peak`.
inline ImageGrid synthetic_image(int width, int height, int band, std::uint64_t seed, int channels = 1,
                                 double decay = 1.0, double peak = 0.9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  struct Wave { int fx, fy; std::vector<double> a, b; };
  std::vector<Wave> waves;
  for (int fx = 0; fx <= band; ++fx)
    for (int fy = -band; fy <= band; ++fy) {
      if (fx == 0 && fy <= 0) continue;
      const double s = 1.0 / std::pow(1.0 + std::hypot(fx, fy), decay);
      Wave w{fx, fy, {}, {}};
      for (int c = 0; c < channels; ++c) {
        w.a.push_back(s * normal(rng));
        w.b.push_back(s * normal(rng));
      }
      waves.push_back(std::move(w));
    }
  ImageGrid g;
  g.width = width;
  g.height = height;
  g.channels = channels;
  g.data.assign(g.pixels() * channels, 0.0);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const double x = pixel_center(c, width), y = pixel_center(r, height);
      for (const auto& w : waves) {
        const double u = std::numbers::pi * (w.fx * x + w.fy * y);
        const double su = std::sin(u), cu = std::cos(u);
        for (int ch = 0; ch < channels; ++ch) g.at(r, c, ch) += w.a[ch] * su + w.b[ch] * cu;
      }
    }
  for (int ch = 0; ch < channels; ++ch) {
    double mean = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < g.pixels(); ++i) mean += g.data[i * channels + ch];
    mean /= static_cast<double>(g.pixels());
    for (std::size_t i = 0; i < g.pixels(); ++i) mx = std::max(mx, std::abs(g.data[i * channels + ch] - mean));
    for (std::size_t i = 0; i < g.pixels(); ++i)
      g.data[i * channels + ch] = peak * (g.data[i * channels + ch] - mean) / mx;
  }
  return g;
}

}  // namespace sinr
