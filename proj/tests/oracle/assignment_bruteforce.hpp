#pragma once

// Minimum-cost rectangular assignment by trying every injective map from
// the smaller side into the larger one.

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

namespace detail {
inline void search(const Eigen::MatrixXd& c, Eigen::Index row, std::vector<bool>& used, double acc,
                   double& best) {
    if (row == c.rows()) {
        if (acc < best) best = acc;
        return;
    }
    for (Eigen::Index col = 0; col < c.cols(); ++col) {
        if (used[static_cast<std::size_t>(col)]) continue;
        used[static_cast<std::size_t>(col)] = true;
        search(c, row + 1, used, acc + c(row, col), best);
        used[static_cast<std::size_t>(col)] = false;
    }
}
}  // namespace detail

inline double min_assignment_cost(const Eigen::MatrixXd& cost) {
    const Eigen::MatrixXd c = cost.rows() <= cost.cols() ? cost : Eigen::MatrixXd(cost.transpose());
    if (c.rows() == 0) return 0.0;
    std::vector<bool> used(static_cast<std::size_t>(c.cols()), false);
    double best = std::numeric_limits<double>::infinity();
    detail::search(c, 0, used, 0.0, best);
    return best;
}

}  // namespace oracle
