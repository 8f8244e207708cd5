#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mtt {

struct AssignmentResult {
    std::vector<int> col_for_row;  ///< -1 for rows left unassigned
    double total_cost = 0.0;
};

/// Exact rectangular min-cost assignment (Hungarian method with potentials,
/// O(n^2 m)). Every row is assigned when rows <= cols, otherwise every
/// column is. Deterministic for identical input. Throws ShapeError on
/// non-finite costs.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace mtt
