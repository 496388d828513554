#pragma once

#include <Eigen/Dense>

namespace softcbf {

using Vec2 = Eigen::Vector2d;

}  // namespace softcbf
