#include "mtt/assignment.hpp"

#include <limits>

#include "mtt/error.hpp"

namespace mtt {

namespace {

// Rows <= cols. Returns the column of each row.
std::vector<int> hungarian(const Eigen::MatrixXd& a) {
    const auto n = static_cast<int>(a.rows());
    const auto m = static_cast<int>(a.cols());
    constexpr double inf = std::numeric_limits<double>::infinity();

    // 1-based potentials and matching; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> col_for_row(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) col_for_row[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    return col_for_row;
}

}  // namespace

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
    if (!cost.allFinite()) throw ShapeError("assignment cost matrix must be finite");
    AssignmentResult out;
    out.col_for_row.assign(static_cast<std::size_t>(cost.rows()), -1);
    if (cost.rows() == 0 || cost.cols() == 0) return out;

    if (cost.rows() <= cost.cols()) {
        out.col_for_row = hungarian(cost);
    } else {
        const std::vector<int> row_for_col = hungarian(cost.transpose());
        for (std::size_t c = 0; c < row_for_col.size(); ++c)
            out.col_for_row[static_cast<std::size_t>(row_for_col[c])] = static_cast<int>(c);
    }
    for (std::size_t r = 0; r < out.col_for_row.size(); ++r)
        if (out.col_for_row[r] >= 0) out.total_cost += cost(static_cast<Eigen::Index>(r), out.col_for_row[r]);
    return out;
}

}  // namespace mtt
