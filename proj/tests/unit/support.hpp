// Shared helpers for the unit tests: brute-force oracles and finite
// differences.
#ifndef SRUNER_TESTS_SUPPORT_HPP_
#define SRUNER_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sruner/autograd.hpp"

namespace test_support {

using Span = std::pair<int, int>;

// Every set of spans over n tokens in which no two spans partially
// overlap, found by filtering all subsets of the n(n+1)/2 spans.
inline std::vector<std::vector<Span>> laminar_families(int n) {
  std::vector<Span> spans;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) spans.push_back({a, b});
  }
  std::vector<std::vector<Span>> out;
  const unsigned total = 1u << spans.size();
  for (unsigned mask = 0; mask < total; ++mask) {
    std::vector<Span> pick;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (mask & (1u << i)) pick.push_back(spans[i]);
    }
    bool ok = true;
    for (const auto& x : pick) {
      for (const auto& y : pick) {
        if (x.first < y.first && y.first <= x.second && x.second < y.second) ok = false;
      }
    }
    if (ok) out.push_back(std::move(pick));
  }
  return out;
}

inline sruner::Matrix random_matrix(sruner::Index rows, sruner::Index cols, std::mt19937_64& rng,
                                    double stddev = 1.0) {
  std::normal_distribution<double> d(0.0, stddev);
  sruner::Matrix m(rows, cols);
  for (sruner::Index i = 0; i < rows; ++i) {
    for (sruner::Index j = 0; j < cols; ++j) m(i, j) = d(rng);
  }
  return m;
}

// Central differences of f with respect to every entry of x.
inline sruner::Matrix numeric_gradient(sruner::Matrix& x, const std::function<double()>& f, double h = 1e-5) {
  sruner::Matrix g(x.rows(), x.cols());
  for (sruner::Index i = 0; i < x.rows(); ++i) {
    for (sruner::Index j = 0; j < x.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + h;
      const double up = f();
      x(i, j) = keep - h;
      const double down = f();
      x(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// max |a - b| / max(1, |b|) over entries.
inline double relative_error(const sruner::Matrix& a, const sruner::Matrix& b) {
  double worst = 0.0;
  for (sruner::Index i = 0; i < a.rows(); ++i) {
    for (sruner::Index j = 0; j < a.cols(); ++j) {
      double denom = std::max(1.0, std::abs(b(i, j)));
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
    }
  }
  return worst;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sruner_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support

#endif  // SRUNER_TESTS_SUPPORT_HPP_
