#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cotlens {

using Eigen::Index;
using Eigen::Map;
using Eigen::Ref;
using Eigen::VectorXd;
using Eigen::VectorXi;
using ConstRefVec = const Ref<const VectorXd>&;

inline VectorXd to_vector(const std::vector<double>& v) {
    return Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

inline std::vector<double> to_std(ConstRefVec v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace cotlens
