#pragma once

// Triangle quadrature. Weights are normalized to sum to 1 and are scaled by
// the physical element area at the point of use.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace platemix {

struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric
  std::vector<double> weights;
  int degree = 0;

  size_t size() const { return points.size(); }
};

namespace detail {

inline void push_sym3(QuadratureRule& r, double a, double b, double w) {
  // permutations of (a, b, b)
  r.points.push_back({a, b, b});
  r.points.push_back({b, a, b});
  r.points.push_back({b, b, a});
  r.weights.insert(r.weights.end(), 3, w);
}

inline void push_sym6(QuadratureRule& r, double a, double b, double c, double w) {
  r.points.push_back({a, b, c});
  r.points.push_back({a, c, b});
  r.points.push_back({b, a, c});
  r.points.push_back({b, c, a});
  r.points.push_back({c, a, b});
  r.points.push_back({c, b, a});
  r.weights.insert(r.weights.end(), 6, w);
}

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess on [-1,1]
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = 0.5 * (t + 1.0);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);  // already scaled for [0,1]
  }
}

// Collapsed tensor rule on the reference triangle, exact for total degree d.
inline QuadratureRule tensor_rule(int degree) {
  int n = (degree + 3) / 2;  // 2n-1 >= degree+1
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  QuadratureRule r;
  r.degree = degree;
  r.points.reserve(n * n);
  r.weights.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double u = x[i], v = x[j];
      double xi = u, eta = v * (1.0 - u);
      r.points.push_back({1.0 - xi - eta, xi, eta});
      r.weights.push_back(2.0 * w[i] * w[j] * (1.0 - u));  // x2: normalize to unit sum
    }
  return r;
}

}  // namespace detail

// Rule exact for bivariate polynomials of the requested total degree.
// Degrees 1..6 use standard symmetric point sets; higher degrees fall back to
// a collapsed tensor product rule.
inline QuadratureRule quadrature(int degree) {
  if (degree < 1) throw std::invalid_argument("quadrature degree must be >= 1");
  QuadratureRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(1.0);
      break;
    case 2:
      detail::push_sym3(r, 2.0 / 3, 1.0 / 6, 1.0 / 3);
      break;
    case 3:
    case 4:
      detail::push_sym3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
      detail::push_sym3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
      r.degree = 4;
      break;
    case 5:
      r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(0.225);
      detail::push_sym3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506);
      detail::push_sym3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    case 6:
      detail::push_sym3(r, 0.501426509658179, 0.249286745170910, 0.116786275726379);
      detail::push_sym3(r, 0.873821971016996, 0.063089014491502, 0.050844906370207);
      detail::push_sym6(r, 0.053145049844817, 0.310352451033784, 0.636502499121399,
                        0.082851075618374);
      break;
    default:
      return detail::tensor_rule(degree);
  }
  return r;
}

}  // namespace platemix
