#pragma once

// JSON encoding of SinusoidalNet. Matrices are nested row-major arrays.
// Doubles are written in shortest round-trip form, so decode(encode(net))
// reproduces every finite parameter bit for bit.

#include <fstream>
#include <string>

#include <json.hpp>

#include "sinr/errors.hpp"
#include "sinr/net.hpp"

namespace sinr {

using json = nlohmann::json;

namespace detail {

template <typename Mat>
json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const json& j,
                                                                       const char* name,
                                                                       Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw ConfigError(std::string(name) + ": expected array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(std::string(name) + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ConfigError(std::string(name) + ": non-numeric entry");
      m(i, c) = v.get<Scalar>();
    }
  }
  return m;
}

inline VectorXd vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + ": expected array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(name) + ": non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline json to_json(const SinusoidalNet& net) {
  json j;
  j["freq_int"] = detail::matrix_to_json(net.bank.freq);
  j["period"] = net.bank.period;
  j["shifts"] = detail::vector_to_json(net.bank.shifts);
  json layers = json::array();
  for (const auto& layer : net.hidden)
    layers.push_back({{"W", detail::matrix_to_json(layer.W)}, {"b", detail::vector_to_json(layer.b)}});
  j["layers"] = std::move(layers);
  j["C"] = detail::matrix_to_json(net.C);
  j["e"] = detail::vector_to_json(net.e);
  j["bound_mode"] = to_string(net.bound_mode);
  j["bounds"] = detail::vector_to_json(net.bounds);
  j["deep_bound"] = net.deep_bound;
  return j;
}

inline SinusoidalNet net_from_json(const json& j) {
  try {
    SinusoidalNet net;
    net.bank.freq = detail::matrix_from_json<int>(j.at("freq_int"), "freq_int");
    net.bank.period = j.at("period").get<double>();
    net.bank.shifts = detail::vector_from_json(j.at("shifts"), "shifts");
    for (const auto& layer : j.at("layers"))
      net.hidden.push_back({detail::matrix_from_json<double>(layer.at("W"), "W"),
                            detail::vector_from_json(layer.at("b"), "b")});
    net.C = detail::matrix_from_json<double>(j.at("C"), "C");
    net.e = detail::vector_from_json(j.at("e"), "e");
    net.bound_mode = parse_bound_mode(j.value("bound_mode", std::string("none")));
    if (j.contains("bounds")) net.bounds = detail::vector_from_json(j.at("bounds"), "bounds");
    net.deep_bound = j.value("deep_bound", 0.0);
    net.validate();
    return net;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed net JSON: ") + ex.what());
  }
}

inline void save_net(const SinusoidalNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_json(net).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline SinusoidalNet load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError("cannot parse " + path + ": " + ex.what());
  }
  return net_from_json(j);
}

}  // namespace sinr
