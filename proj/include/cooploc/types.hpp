#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cooploc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Agents are numbered 1..n; ids 1..n_landmarks are landmarks, the rest vehicles.
using AgentId = std::int32_t;

enum class AgentKind { Landmark, Vehicle };

}  // namespace cooploc
