#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <type_traits>
#include <vector>

#include "relbif/errors.hpp"
#include "relbif/linalg.hpp"
#include "relbif/numerics.hpp"

namespace relbif {

struct MetricField {
  std::function<Mat(const Vec&)> eval;
  std::function<std::vector<Mat>(const Vec&)> deriv;  // optional: deriv[l] = d g / d q^l
  bool constant = false;                              // Christoffel symbols vanish identically
};

struct ChartDomain {
  Vec center;
  double radius = std::numeric_limits<double>::infinity();
  bool contains(const Vec& q) const {
    return center.size() == 0 || (q - center).norm() < radius;
  }
};

using Christoffel = std::vector<Mat>;  // gamma[k](i, j)

struct GeoOptions {
  int steps = 64;
  double tol = 1e-10;
  DiffScheme scheme{1e-3, 4, 0};
  const ChartDomain* domain = nullptr;
  bool check_error = true;
};

inline bool all_finite(double x) { return std::isfinite(x); }
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

// Derivative of order 1 or 2 of f at `at` by central differences with
// Richardson extrapolation. f may return a scalar or any dense Eigen type.
template <typename F>
auto dir_derivative(F&& f, int order_of_derivative, const DiffScheme& scheme, double at = 0.0) {
  using T = std::decay_t<decltype(f(at))>;
  if (order_of_derivative != 1 && order_of_derivative != 2)
    throw Error(ErrorCode::BadInput, "derivative order must be 1 or 2");
  if (scheme.step_rel <= 0.0 || (scheme.order != 2 && scheme.order != 4))
    throw Error(ErrorCode::BadInput, "invalid difference scheme");
  auto call = [&](double t) -> T {
    T y = f(t);
    if (!all_finite(y)) throw Error(ErrorCode::NonFinite, "non-finite value on difference stencil");
    return y;
  };
  const double h0 = scheme.step_rel * std::max(1.0, std::abs(at));
  const bool second = order_of_derivative == 2;
  std::vector<T> center;
  if (second) center.push_back(call(at));
  auto base = [&](double h) -> T {
    if (scheme.order == 2) {
      T p = call(at + h), m = call(at - h);
      if (!second) return T((p - m) / (2.0 * h));
      return T((p - 2.0 * center[0] + m) / (h * h));
    }
    T p1 = call(at + h), m1 = call(at - h), p2 = call(at + 2.0 * h), m2 = call(at - 2.0 * h);
    if (!second) return T((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h));
    return T((16.0 * (p1 + m1) - (p2 + m2) - 30.0 * center[0]) / (12.0 * h * h));
  };
  const int levels = std::max(0, scheme.richardson_levels);
  std::vector<T> table;
  for (int j = 0; j <= levels; ++j) table.push_back(base(h0 / std::pow(2.0, j)));
  for (int lvl = 1; lvl <= levels; ++lvl) {
    const double w = std::pow(2.0, scheme.order + 2 * (lvl - 1));
    for (int j = levels; j >= lvl; --j) table[j] = T((w * table[j] - table[j - 1]) / (w - 1.0));
  }
  return table[levels];
}

// Taylor coefficients c_0..c_6 at 0 of the degree-6 interpolant of f on the
// nodes h * {-1, -1/2, -1/4, 0, 1/4, 1/2, 1}.
const Mat& local_poly_weights();
template <typename F>
auto local_poly(F&& f, double h) {
  using T = std::decay_t<decltype(f(0.0))>;
  static const double nodes[7] = {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
  std::vector<T> y;
  y.reserve(7);
  for (double s : nodes) {
    T v = f(s * h);
    if (!all_finite(v)) throw Error(ErrorCode::NonFinite, "non-finite value on interpolation stencil");
    y.push_back(v);
  }
  const Mat& W = local_poly_weights();
  std::vector<T> c;
  double scale = 1.0;
  for (int k = 0; k < 7; ++k) {
    T acc = T(W(k, 0) * y[0]);
    for (int j = 1; j < 7; ++j) acc = T(acc + W(k, j) * y[j]);
    c.push_back(T(acc / scale));
    scale *= h;
  }
  return c;
}

template <typename T>
T poly_eval(const std::vector<T>& c, double t, int first = 0) {
  T acc = c.back();
  for (int k = static_cast<int>(c.size()) - 2; k >= first; --k) acc = T(acc * t + c[k]);
  return acc;
}

Mat metric_at(const MetricField& metric, const Vec& q);
std::vector<Mat> metric_derivatives(const MetricField& metric, const Vec& q, const DiffScheme& scheme);
Christoffel christoffel(const MetricField& metric, const Vec& q,
                        const DiffScheme& scheme = DiffScheme{1e-3, 4, 0});
Vec contract(const Christoffel& gamma, const Vec& v);

struct GeodesicState {
  Vec x;
  Vec p;
};

// Geodesic from (q, v) integrated to time t with fixed RK4 steps.
GeodesicState geodesic_flow(const MetricField& metric, const Vec& q, const Vec& v, double t, int steps,
                            const GeoOptions& opt);

Vec riemannian_exp(const MetricField& metric, const Vec& q, const Vec& v, const GeoOptions& opt = {});

}  // namespace relbif
