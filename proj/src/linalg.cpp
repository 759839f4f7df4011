#include "dapm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace dapm {

void fix_column_signs(Eigen::MatrixXd& columns) {
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index r = 0; r < columns.rows(); ++r) {
            // Near-ties resolve to the earlier row so tiny perturbations do not flip the sign.
            if (std::abs(columns(r, c)) > best_abs * (1.0 + 1e-9)) {
                best_abs = std::abs(columns(r, c));
                best = r;
            }
        }
        if (columns.rows() > 0 && columns(best, c) < 0.0) {
            columns.col(c) *= -1.0;
        }
    }
}

void truncate_to_common_rows(Eigen::MatrixXd& a, Eigen::MatrixXd& b) {
    const Eigen::Index n = std::min(a.rows(), b.rows());
    if (a.rows() != n) a.conservativeResize(n, Eigen::NoChange);
    if (b.rows() != n) b.conservativeResize(n, Eigen::NoChange);
}

} // namespace dapm
