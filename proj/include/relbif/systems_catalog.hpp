#pragma once

#include <map>
#include <string>
#include <vector>

#include "relbif/mechanics.hpp"

namespace relbif {

using Params = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  Params defaults;
  std::string oracle_notes;
};

const std::vector<CatalogEntry>& catalog();
ChartSystem make_system(const std::string& name, const Params& params = {});

// Unit vector on the sphere in Riemann normal coordinates w about the south
// pole (angle |w| from straight down) and its 3x2 Jacobian.
struct SpherePoint {
  Eigen::Vector3d n;
  Eigen::Matrix<double, 3, 2> dn;
};
SpherePoint sphere_normal_chart(const Eigen::Vector2d& w);

}  // namespace relbif
