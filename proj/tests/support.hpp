#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's free-energy or message-passing code.

#include "fbethe/model.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fbethe::testing {

struct Draw {
  std::mt19937_64 gen;
  explicit Draw(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  Vector normal(int n) {
    std::normal_distribution<double> d;
    Vector v(n);
    for (int k = 0; k < n; ++k) v(k) = d(gen);
    return v;
  }
  Vector positive(int n, double lo, double hi) {
    Vector v(n);
    for (int k = 0; k < n; ++k) v(k) = log_uniform(lo, hi);
    return v;
  }
};

// Edge term of the fractional energy as a function of the pair covariance x:
//   R·x − (1/(2α))·log(1 − x²/S²),  S = σᵢσⱼ.
// f(b) − f(a) is evaluated as R(b − a) − (1/(2α))·log1p((a − b)(a + b)/(S² − a²)),
// which keeps the comparison exact near the minimum.
inline double edge_term_difference(double alpha, double r, double s, double a, double b) {
  const double room = (s - a) * (s + a);
  return r * (b - a) - std::log1p((a - b) * (a + b) / room) / (2.0 * alpha);
}

// Golden-section search over (−S, S) for the minimizer of the edge term.
inline double golden_edge_minimum(double alpha, double r, double sigma_i, double sigma_j) {
  const double s = sigma_i * sigma_j;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -s;
  double hi = s;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  for (int it = 0; it < 400 && hi - lo > 1e-15 * s; ++it) {
    if (edge_term_difference(alpha, r, s, x1, x2) > 0.0) {
      hi = x2;
      x2 = x1;
      x1 = hi - phi * (hi - lo);
    } else {
      lo = x1;
      x1 = x2;
      x2 = lo + phi * (hi - lo);
    }
  }
  return 0.5 * (lo + hi);
}

// Central finite-difference gradient with step 1e−5·(1 + |x_k|).
inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (int k = 0; k < x.size(); ++k) {
    const double h = 1e-5 * (1.0 + std::abs(x(k)));
    Vector xp = x;
    Vector xm = x;
    xp(k) += h;
    xm(k) -= h;
    g(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Textbook Gaussian belief propagation on J = I + R with node potentials
// (J_kk, h_k). msg[i][j] is the message i → j as (precision, shift).
struct GaBP {
  struct Msg {
    double precision = 0.0;
    double shift = 0.0;
  };
  Matrix J;
  Vector h;
  std::vector<std::vector<Msg>> msg;

  GaBP(const Matrix& J_, const Vector& h_) : J(J_), h(h_) {
    const auto n = static_cast<std::size_t>(J.rows());
    msg.assign(n, std::vector<Msg>(n));
  }

  bool linked(int i, int j) const { return i != j && J(i, j) != 0.0; }

  // All messages recomputed from the previous ones.
  void sweep() {
    const int n = static_cast<int>(J.rows());
    auto next = msg;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!linked(i, j)) continue;
        double p = J(i, i);
        double s = h(i);
        for (int k = 0; k < n; ++k) {
          if (k == j || !linked(k, i)) continue;
          p += msg[k][i].precision;
          s += msg[k][i].shift;
        }
        next[i][j] = {-J(i, j) * J(i, j) / p, -J(i, j) * s / p};
      }
    }
    msg = std::move(next);
  }
};

}  // namespace fbethe::testing
