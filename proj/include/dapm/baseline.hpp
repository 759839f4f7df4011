#pragma once

// PCA-subspace reference detector.

#include <Eigen/Core>

#include <json.hpp>

#include <string_view>

namespace dapm {

enum class Verdict { healthy, anomalous };

std::string_view to_string(Verdict v) noexcept;

struct PcaModel {
    Eigen::MatrixXd components;         ///< K x p, orthonormal columns
    Eigen::VectorXd mean;               ///< training column means
    Eigen::VectorXd explained_variance; ///< length p, nonincreasing
    double total_variance = 0.0;

    Eigen::Index rank() const noexcept { return components.cols(); }
};

/// Smallest p whose leading components explain at least `fraction` of the centred variance,
/// capped at min(N, K). Returns 1 for data without variance.
Eigen::Index components_for_variance(const Eigen::MatrixXd& training, double fraction);

/// Top-p right singular vectors of the centred training matrix, each signed so that its
/// largest-magnitude entry is positive. Throws ParameterError unless 1 <= p <= min(N, K).
PcaModel fit_pca(const Eigen::MatrixXd& training, Eigen::Index p);

/// Squared Frobenius norm of (Xs - mean) P - (Xt - mean) P.
///
/// Row counts are truncated to the shorter matrix; a feature count mismatch throws.
double pca_distance(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, const PcaModel& model);

/// Anomalous iff distance > epsilon. Throws ParameterError unless epsilon > 0.
Verdict pca_hypothesis_test(double distance, double epsilon);

nlohmann::json to_json(const PcaModel& model);
PcaModel pca_model_from_json(const nlohmann::json& j);

} // namespace dapm
