#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace tmag {

using Index = std::int64_t;

// Row-major throughout: embedding tables are accessed row-wise (one row per
// entity) and gradients are accumulated per row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

using IdSet = std::vector<Index>;  // sorted, unique

}  // namespace tmag
