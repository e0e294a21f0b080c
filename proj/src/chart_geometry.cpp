#include "relbif/chart_geometry.hpp"

namespace relbif {

const Mat& local_poly_weights() {
  static const Mat W = [] {
    const double nodes[7] = {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
    Mat V(7, 7);
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) V(j, k) = std::pow(nodes[j], k);
    return Mat(V.fullPivLu().inverse());
  }();
  return W;
}

Mat metric_at(const MetricField& metric, const Vec& q) {
  Mat g = metric.eval(q);
  if (g.rows() != q.size() || g.cols() != q.size())
    throw Error(ErrorCode::DimensionMismatch, "metric has wrong shape");
  if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "metric is not finite");
  return 0.5 * (g + g.transpose());
}

std::vector<Mat> metric_derivatives(const MetricField& metric, const Vec& q, const DiffScheme& scheme) {
  const Eigen::Index n = q.size();
  if (metric.constant) return std::vector<Mat>(n, Mat::Zero(n, n));
  if (metric.deriv) return metric.deriv(q);
  std::vector<Mat> dg(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    dg[l] = dir_derivative(
        [&](double t) {
          Vec p = q;
          p(l) += t;
          return metric_at(metric, p);
        },
        1, scheme, 0.0);
  }
  return dg;
}

Christoffel christoffel(const MetricField& metric, const Vec& q, const DiffScheme& scheme) {
  const Eigen::Index n = q.size();
  Christoffel gamma(n, Mat::Zero(n, n));
  if (metric.constant) return gamma;
  Eigen::LLT<Mat> llt(metric_at(metric, q));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::MetricDegenerate, "metric is not positive definite");
  const std::vector<Mat> dg = metric_derivatives(metric, q, scheme);
  // lowered symbols [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  Mat low(n * n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l)
        low(i * n + j, l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  Mat raised = llt.solve(low.transpose());  // n x n^2
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) gamma[k](i, j) = raised(k, i * n + j);
  for (Eigen::Index k = 0; k < n; ++k) gamma[k] = 0.5 * (gamma[k] + gamma[k].transpose()).eval();
  return gamma;
}

Vec contract(const Christoffel& gamma, const Vec& v) {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v.dot(gamma[k] * v);
  return out;
}

namespace {

void check_domain(const GeoOptions& opt, const Vec& x) {
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "geodesic state is not finite");
  if (opt.domain && !opt.domain->contains(x))
    throw Error(ErrorCode::LeftChart, "geodesic left the chart validity region");
}

}  // namespace

GeodesicState geodesic_flow(const MetricField& metric, const Vec& q, const Vec& v, double t, int steps,
                            const GeoOptions& opt) {
  if (q.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "vector and base point differ in size");
  GeodesicState s{q, v};
  check_domain(opt, q);
  if (metric.constant) {
    s.x = q + t * v;
    check_domain(opt, s.x);
    return s;
  }
  const double h = t / steps;
  auto acc = [&](const Vec& x, const Vec& p) -> Vec {
    check_domain(opt, x);
    return -contract(christoffel(metric, x, opt.scheme), p);
  };
  for (int i = 0; i < steps; ++i) {
    const Vec k1x = s.p, k1p = acc(s.x, s.p);
    const Vec x2 = s.x + 0.5 * h * k1x, p2 = s.p + 0.5 * h * k1p;
    const Vec k2x = p2, k2p = acc(x2, p2);
    const Vec x3 = s.x + 0.5 * h * k2x, p3 = s.p + 0.5 * h * k2p;
    const Vec k3x = p3, k3p = acc(x3, p3);
    const Vec x4 = s.x + h * k3x, p4 = s.p + h * k3p;
    const Vec k4x = p4, k4p = acc(x4, p4);
    s.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    s.p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  check_domain(opt, s.x);
  return s;
}

Vec riemannian_exp(const MetricField& metric, const Vec& q, const Vec& v, const GeoOptions& opt) {
  if (q.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "vector and base point differ in size");
  if (v.squaredNorm() == 0.0) {
    check_domain(opt, q);
    return q;
  }
  const GeodesicState fine = geodesic_flow(metric, q, v, 1.0, opt.steps, opt);
  if (opt.check_error && !metric.constant) {
    const GeodesicState coarse = geodesic_flow(metric, q, v, 1.0, std::max(1, opt.steps / 2), opt);
    const double est = (fine.x - coarse.x).norm() / 15.0;
    if (est > opt.tol) throw Error(ErrorCode::GeoTolerance, "step-doubling estimate exceeds tolerance");
  }
  return fine.x;
}

}  // namespace relbif
