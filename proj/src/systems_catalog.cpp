#include "relbif/systems_catalog.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace relbif {

namespace {

double param(const Params& given, const CatalogEntry& e, const std::string& key) {
  auto it = given.find(key);
  if (it != given.end()) return it->second;
  return e.defaults.at(key);
}

Eigen::Matrix2d rot2(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Eigen::Matrix3d rot3(const Vec& xi) {
  const double th = xi.norm();
  if (th == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(th, Eigen::Vector3d(xi / th)).toRotationMatrix();
}

Vec cross(const Vec& a, const Vec& b) {
  return Eigen::Vector3d(a).cross(Eigen::Vector3d(b));
}

// Rotate consecutive coordinate pairs by the given angle.
Vec rotate_pairs(const Vec& q, const std::vector<double>& angles) {
  Vec out = q;
  for (size_t i = 0; i < angles.size(); ++i) out.segment<2>(2 * i) = rot2(angles[i]) * q.segment<2>(2 * i);
  return out;
}

Vec infinitesimal_pairs(const Vec& q, const std::vector<double>& rates) {
  Vec out = Vec::Zero(q.size());
  for (size_t i = 0; i < rates.size(); ++i) {
    out(2 * i) = -rates[i] * q(2 * i + 1);
    out(2 * i + 1) = rates[i] * q(2 * i);
  }
  return out;
}

void require_positive(const Params& p, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = p.find(k);
    if (it != p.end() && !(it->second > 0.0))
      throw Error(ErrorCode::BadParams, std::string("parameter ") + k + " must be positive");
  }
}

ChartSystem planar_rotor(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"m"});
  const double m = param(p, e, "m"), k = param(p, e, "k");
  ChartSystem s;
  s.name = e.name;
  s.n = 2;
  s.metric.eval = [m](const Vec&) { return Mat(m * Mat::Identity(2, 2)); };
  s.metric.constant = true;
  s.potential = [k](const Vec& q) { return 0.5 * k * q.squaredNorm(); };
  s.generator = [](const Vec& xi, const Vec& q) { return infinitesimal_pairs(q, {xi(0)}); };
  s.group_action = [](const Vec& xi, const Vec& q) { return rotate_pairs(q, {xi(0)}); };
  s.algebra = make_abelian<double>(1);
  s.q_e = Vec::Zero(2);
  s.chart_radius = param(p, e, "chart_radius");
  s.declared_isotropy = Mat::Identity(1, 1);
  return s;
}

ChartSystem flat_t2(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"a", "kappa", "k"});
  const double a = param(p, e, "a"), kappa = param(p, e, "kappa"), k = param(p, e, "k"),
               eps = param(p, e, "eps");
  ChartSystem s;
  s.name = e.name;
  s.n = 4;
  // first factor: flat cylinder a^2 (d log r^2 + dphi^2); second factor Euclidean;
  // invariant coupling eps (dphi_1 (x) w + w (x) dphi_1) with w = r_2^2 dphi_2
  s.metric.eval = [a, eps](const Vec& x) {
    const double r1sq = x(0) * x(0) + x(1) * x(1);
    Mat g = Mat::Identity(4, 4);
    g.topLeftCorner(2, 2) *= a * a / r1sq;
    Vec A = Vec::Zero(4), W = Vec::Zero(4);
    A << -x(1) / r1sq, x(0) / r1sq, 0.0, 0.0;
    W << 0.0, 0.0, -x(3), x(2);
    g += eps * (A * W.transpose() + W * A.transpose());
    return g;
  };
  s.potential = [a, kappa, k](const Vec& x) {
    const double r1 = std::hypot(x(0), x(1));
    return 0.5 * kappa * (r1 - a) * (r1 - a) + 0.5 * k * (x(2) * x(2) + x(3) * x(3));
  };
  s.generator = [](const Vec& xi, const Vec& q) { return infinitesimal_pairs(q, {xi(0), xi(1)}); };
  s.group_action = [](const Vec& xi, const Vec& q) { return rotate_pairs(q, {xi(0), xi(1)}); };
  s.algebra = make_abelian<double>(2);
  s.q_e = Vec::Zero(4);
  s.q_e(0) = a;
  s.chart_radius = param(p, e, "chart_radius");
  if (s.chart_radius >= a) throw Error(ErrorCode::BadParams, "chart radius must stay below a");
  s.coordinates_valid = [a, eps](const Vec& x) {
    return std::hypot(x(0), x(1)) > 0.1 * a && std::abs(eps) * std::hypot(x(2), x(3)) < 0.9 * a;
  };
  s.declared_isotropy = Mat::Zero(2, 1);
  s.declared_isotropy(1, 0) = 1.0;
  return s;
}

ChartSystem spherical_pendulum(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"m", "l", "g"});
  const double m = param(p, e, "m"), l = param(p, e, "l"), g0 = param(p, e, "g");
  ChartSystem s;
  s.name = e.name;
  s.n = 2;
  s.metric.eval = [m, l](const Vec& w) {
    const SpherePoint sp = sphere_normal_chart(w);
    return Mat(m * l * l * sp.dn.transpose() * sp.dn);
  };
  s.potential = [m, l, g0](const Vec& w) { return -m * g0 * l * std::cos(w.norm()); };
  s.generator = [](const Vec& xi, const Vec& q) { return infinitesimal_pairs(q, {xi(0)}); };
  s.group_action = [](const Vec& xi, const Vec& q) { return rotate_pairs(q, {xi(0)}); };
  s.algebra = make_abelian<double>(1);
  s.q_e = Vec::Zero(2);
  s.chart_radius = param(p, e, "chart_radius");
  if (s.chart_radius >= M_PI) throw Error(ErrorCode::BadParams, "chart radius must stay below pi");
  s.declared_isotropy = Mat::Identity(1, 1);
  return s;
}

ChartSystem double_spherical_pendulum(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"m1", "m2", "l1", "l2", "g"});
  const double m1 = param(p, e, "m1"), m2 = param(p, e, "m2"), l1 = param(p, e, "l1"),
               l2 = param(p, e, "l2"), g0 = param(p, e, "g");
  ChartSystem s;
  s.name = e.name;
  s.n = 4;
  s.metric.eval = [=](const Vec& w) {
    const SpherePoint a = sphere_normal_chart(w.head<2>()), b = sphere_normal_chart(w.tail<2>());
    Eigen::Matrix<double, 3, 4> J1 = Eigen::Matrix<double, 3, 4>::Zero(), J2;
    J1.leftCols<2>() = l1 * a.dn;
    J2.leftCols<2>() = l1 * a.dn;
    J2.rightCols<2>() = l2 * b.dn;
    return Mat(m1 * J1.transpose() * J1 + m2 * J2.transpose() * J2);
  };
  s.potential = [=](const Vec& w) {
    const double c1 = std::cos(w.head<2>().norm()), c2 = std::cos(w.tail<2>().norm());
    return -(m1 + m2) * g0 * l1 * c1 - m2 * g0 * l2 * c2;
  };
  s.generator = [](const Vec& xi, const Vec& q) { return infinitesimal_pairs(q, {xi(0), xi(0)}); };
  s.group_action = [](const Vec& xi, const Vec& q) { return rotate_pairs(q, {xi(0), xi(0)}); };
  s.algebra = make_abelian<double>(1);
  s.q_e = Vec::Zero(4);
  s.chart_radius = param(p, e, "chart_radius");
  if (s.chart_radius >= M_PI) throw Error(ErrorCode::BadParams, "chart radius must stay below pi");
  s.declared_isotropy = Mat::Identity(1, 1);
  return s;
}

ChartSystem so3_central_force(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"m", "kappa", "r0"});
  const double m = param(p, e, "m"), kappa = param(p, e, "kappa"), r0 = param(p, e, "r0");
  ChartSystem s;
  s.name = e.name;
  s.n = 3;
  s.metric.eval = [m](const Vec&) { return Mat(m * Mat::Identity(3, 3)); };
  s.metric.constant = true;
  s.potential = [kappa, r0](const Vec& q) {
    const double r = q.norm();
    return 0.5 * kappa * (r - r0) * (r - r0);
  };
  s.generator = [](const Vec& xi, const Vec& q) { return cross(xi, q); };
  s.group_action = [](const Vec& xi, const Vec& q) { return Vec(rot3(xi) * q); };
  s.algebra = make_so3<double>();
  s.q_e = Vec::Zero(3);
  s.q_e(2) = r0;
  s.chart_radius = param(p, e, "chart_radius") * r0;
  if (param(p, e, "chart_radius") >= 1.0) throw Error(ErrorCode::BadParams, "chart radius must stay below r0");
  s.coordinates_valid = [r0](const Vec& x) { return x.norm() > 0.1 * r0 && x.norm() < 10.0 * r0; };
  s.declared_isotropy = Mat::Zero(3, 1);
  s.declared_isotropy(2, 0) = 1.0;
  return s;
}

ChartSystem so3_two_particle(const Params& p, const CatalogEntry& e) {
  require_positive(p, {"m1", "m2", "kappa1", "kappa2", "a", "lambda"});
  const double m1 = param(p, e, "m1"), m2 = param(p, e, "m2"), k1 = param(p, e, "kappa1"),
               k2 = param(p, e, "kappa2"), a = param(p, e, "a"), lam = param(p, e, "lambda");
  ChartSystem s;
  s.name = e.name;
  s.n = 6;
  s.metric.eval = [m1, m2](const Vec&) {
    Vec d(6);
    d << m1, m1, m1, m2, m2, m2;
    return Mat(d.asDiagonal());
  };
  s.metric.constant = true;
  s.potential = [=](const Vec& q) {
    const double r1 = q.head<3>().norm();
    return 0.5 * k1 * (r1 - a) * (r1 - a) + 0.5 * k2 * (q.tail<3>() - lam * q.head<3>()).squaredNorm();
  };
  s.generator = [](const Vec& xi, const Vec& q) {
    Vec out(6);
    out << cross(xi, q.head<3>()), cross(xi, q.tail<3>());
    return out;
  };
  s.group_action = [](const Vec& xi, const Vec& q) {
    const Eigen::Matrix3d R = rot3(xi);
    Vec out(6);
    out << R * q.head<3>(), R * q.tail<3>();
    return out;
  };
  s.algebra = make_so3<double>();
  s.q_e = Vec::Zero(6);
  s.q_e(2) = a;
  s.q_e(5) = lam * a;
  s.chart_radius = param(p, e, "chart_radius") * a;
  if (param(p, e, "chart_radius") >= 1.0) throw Error(ErrorCode::BadParams, "chart radius must stay below a");
  s.coordinates_valid = [a](const Vec& x) { return x.head<3>().norm() > 0.1 * a && x.norm() < 100.0 * a; };
  s.declared_isotropy = Mat::Zero(3, 1);
  s.declared_isotropy(2, 0) = 1.0;
  return s;
}

}  // namespace

SpherePoint sphere_normal_chart(const Eigen::Vector2d& w) {
  const double th = w.norm(), t2 = th * th;
  double sinc, dsc;  // sin(th)/th and (th cos th - sin th)/th^3
  if (th < 0.1) {
    sinc = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0 * (1.0 - t2 / 110.0))));
    dsc = -1.0 / 3.0 + t2 * (1.0 / 30.0 + t2 * (-1.0 / 840.0 + t2 * (1.0 / 45360.0 - t2 / 3991680.0)));
  } else {
    sinc = std::sin(th) / th;
    dsc = (th * std::cos(th) - std::sin(th)) / (t2 * th);
  }
  SpherePoint sp;
  sp.n << sinc * w(0), sinc * w(1), -std::cos(th);
  sp.dn.topRows<2>() = sinc * Eigen::Matrix2d::Identity() + dsc * w * w.transpose();
  sp.dn.row(2) = sinc * w.transpose();
  return sp;
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"planar_rotor", {{"m", 1.0}, {"k", 1.0}, {"chart_radius", 3.0}},
       "V = k r^2 / 2; slice coordinate u satisfies u^4 = theta1^2 / k at the seed"},
      {"flat_t2", {{"a", 1.0}, {"kappa", 1.0}, {"k", 1.0}, {"eps", 0.2}, {"chart_radius", 0.6}},
       "first factor is a flat cylinder of radius a (inertia a^2), second factor Euclidean"},
      {"spherical_pendulum", {{"m", 1.0}, {"l", 1.0}, {"g", 1.0}, {"chart_radius", 2.5}},
       "steady rotations: cos(alpha) = g / (l omega^2), alpha measured from straight down"},
      {"double_spherical_pendulum",
       {{"m1", 1.0}, {"m2", 1.0}, {"l1", 1.0}, {"l2", 1.0}, {"g", 1.0}, {"chart_radius", 2.0}},
       "diagonal rotation about the vertical; property checks only"},
      {"so3_central_force", {{"m", 1.0}, {"kappa", 1.0}, {"r0", 1.0}, {"chart_radius", 0.9}},
       "circular orbits: V'(r) = m r omega^2; every configuration has circle isotropy"},
      {"so3_two_particle",
       {{"m1", 1.0}, {"m2", 1.0}, {"kappa1", 1.0}, {"kappa2", 1.0}, {"a", 1.0}, {"lambda", 2.0},
        {"chart_radius", 0.9}},
       "two particles, V = kappa1 (|q1| - a)^2 / 2 + kappa2 |q2 - lambda q1|^2 / 2; aligned q_e"},
  };
  return entries;
}

ChartSystem make_system(const std::string& name, const Params& params) {
  for (const auto& e : catalog()) {
    if (e.name != name) continue;
    for (const auto& kv : params)
      if (!e.defaults.count(kv.first)) throw Error(ErrorCode::BadParams, "unknown parameter " + kv.first);
    for (const auto& kv : params)
      if (!std::isfinite(kv.second)) throw Error(ErrorCode::BadParams, "parameter " + kv.first + " is not finite");
    if (name == "planar_rotor") return planar_rotor(params, e);
    if (name == "flat_t2") return flat_t2(params, e);
    if (name == "spherical_pendulum") return spherical_pendulum(params, e);
    if (name == "double_spherical_pendulum") return double_spherical_pendulum(params, e);
    if (name == "so3_central_force") return so3_central_force(params, e);
    if (name == "so3_two_particle") return so3_two_particle(params, e);
  }
  throw Error(ErrorCode::UnknownSystem, "no catalog system named " + name);
}

}  // namespace relbif
