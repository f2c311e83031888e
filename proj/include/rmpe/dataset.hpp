#pragma once

#include <Eigen/Sparse>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rmpe/errors.hpp"
#include "rmpe/objectives.hpp"

namespace rmpe {

struct Dataset {
  SparseRowMatrix Z;
  Vector y;
  std::string name;

  Index rows() const { return Z.rows(); }
  Index cols() const { return Z.cols(); }
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_index(std::string_view s, long& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

// libsvm text: "label idx:val idx:val ..." with 1-based strictly ascending indices.
inline Dataset parse_libsvm(std::istream& in, const std::string& name = "libsvm") {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> labels;
  long n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    double label = 0.0;
    if (!detail::parse_double(tok, label)) throw ParseError("bad label '" + tok + "'", lineno);
    if (label == 1.0) {
      label = 1.0;
    } else if (label == 0.0 || label == -1.0) {
      label = -1.0;
    } else {
      throw ParseError("label must be one of -1, 0, +1", lineno);
    }
    const auto row = static_cast<long>(labels.size());
    long last = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", lineno);
      long idx = 0;
      double val = 0.0;
      if (!detail::parse_index(std::string_view(tok).substr(0, colon), idx) || idx < 1)
        throw ParseError("bad feature index in '" + tok + "'", lineno);
      if (!detail::parse_double(std::string_view(tok).substr(colon + 1), val))
        throw ParseError("bad feature value in '" + tok + "'", lineno);
      if (idx <= last) throw ParseError("feature indices must be strictly ascending", lineno);
      last = idx;
      n = std::max(n, idx);
      if (val != 0.0) entries.emplace_back(row, idx - 1, val);
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw ParseError("empty dataset", lineno);
  Dataset d;
  d.name = name;
  d.Z.resize(static_cast<Index>(labels.size()), n);
  d.Z.setFromTriplets(entries.begin(), entries.end());
  d.Z.makeCompressed();
  d.y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return d;
}

inline Dataset parse_libsvm(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'", 0);
  return parse_libsvm(f, path);
}

// Gaussian features, planted separator w*, labels sign(separability * z'w*/||w*|| + noise).
// Column j is then scaled by feature_decay^(j/(n-1)), which makes Z ill-conditioned like real data.
inline Dataset synth_dataset(std::uint64_t seed, Index m, Index n, double separability = 2.0,
                             double feature_decay = 1.0) {
  if (m < 1 || n < 1) throw DomainError("synthetic dataset needs m, n >= 1");
  if (!(separability >= 0.0)) throw DomainError("separability must be non-negative");
  if (!(feature_decay > 0.0) || !(feature_decay <= 1.0)) throw DomainError("feature_decay must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector w(n);
  for (Index j = 0; j < n; ++j) w(j) = g(rng);
  w.normalize();
  Matrix Z(m, n);
  Vector y(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) Z(i, j) = g(rng);
    const double s = separability * Z.row(i).dot(w) + g(rng);
    y(i) = s >= 0.0 ? 1.0 : -1.0;
  }
  for (Index j = 0; j < n && n > 1; ++j)
    Z.col(j) *= std::pow(feature_decay, static_cast<double>(j) / static_cast<double>(n - 1));
  Dataset d;
  d.Z = Z.sparseView();
  d.Z.makeCompressed();
  d.y = y;
  d.name = "synth(seed=" + std::to_string(seed) + ",m=" + std::to_string(m) + ",n=" + std::to_string(n) + ")";
  return d;
}

}  // namespace rmpe
