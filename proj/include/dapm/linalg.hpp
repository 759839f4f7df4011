#pragma once

// Shared helpers for deterministic decompositions.

#include <Eigen/Core>

namespace dapm {

/// Flips each column so that its largest-magnitude entry is positive (first one on ties).
void fix_column_signs(Eigen::MatrixXd& columns);

/// Keeps the first min(rows) rows of both matrices.
void truncate_to_common_rows(Eigen::MatrixXd& a, Eigen::MatrixXd& b);

} // namespace dapm
