#pragma once

// Low-rank-embedding manifold alignment of a source (training) and target (test) feature matrix.
//
// Both matrices are N x K with one time frame per row. Each domain is summarised by the N x N
// reconstruction coefficients R minimising 1/2 ||X^T - X^T R||_F^2 + lambda ||R||_*, whose closed
// form keeps the left singular directions of X with sigma^2 > lambda:
//
//     R = U_r (I - lambda S_r^-2) U_r^T.
//
// The joint embedding F = [F_s; F_t] consists of the d eigenvectors with smallest eigenvalues of
//
//     M = (1 - mu) (I - R)^T (I - R) + 2 mu L,    R = diag(R_s, R_t),  L = [I, -I; -I, I],
//
// where L is the Laplacian of the frame-to-frame correspondence C = [0, I; I, 0]. The anomaly
// score is ||F_s - F_t||_F.

#include <Eigen/Core>

#include <filesystem>
#include <string_view>

namespace dapm {

struct ReconstructionCoeffs {
    Eigen::MatrixXd R;            ///< N x N, symmetric, eigenvalues in [0, 1)
    Eigen::Index retained_rank = 0;
};

ReconstructionCoeffs lre_coefficients(const Eigen::MatrixXd& features, double lambda = 1.0);

/// 1/2 ||X^T - X^T R||_F^2 + lambda ||R||_*  for samples-as-rows X.
double lre_objective(const Eigen::MatrixXd& features, const Eigen::MatrixXd& R, double lambda = 1.0);

Eigen::MatrixXd block_reconstruction(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target);

/// [I, -I; -I, I] of size 2n.
Eigen::MatrixXd correspondence_laplacian(Eigen::Index n);

/// The symmetric PSD cost matrix M for the given per-domain coefficients.
Eigen::MatrixXd alignment_cost(const Eigen::MatrixXd& source_coeffs, const Eigen::MatrixXd& target_coeffs,
                               double mu);

struct JointEmbedding {
    Eigen::MatrixXd source;       ///< N x d
    Eigen::MatrixXd target;       ///< N x d
    Eigen::VectorXd eigenvalues;  ///< length d, nondecreasing
    double mu = 0.5;
    Eigen::Index dim = 0;
};

/// Smallest-d eigenvectors of M for precomputed coefficients.
///
/// Columns are orthonormal over the stacked 2N rows. Eigenvalues closer than 1e-10 (relative
/// to the spectrum scale) form a tie block whose basis is replaced by the Gram-Schmidt
/// projection of the standard basis vectors onto it, so the result depends only on the
/// eigenspace. Each column is then signed so its largest-magnitude entry is positive.
JointEmbedding joint_embed_from_coeffs(const Eigen::MatrixXd& source_coeffs, const Eigen::MatrixXd& target_coeffs,
                                       double mu, Eigen::Index dim);

/// Computes per-domain coefficients, then the joint embedding. Rows are truncated to the
/// shorter matrix. Throws ParameterError for mu outside [0, 1], dim outside [1, 2N] or a
/// feature count mismatch.
JointEmbedding joint_embed(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double mu,
                           Eigen::Index dim, double lambda = 1.0);

/// ||F_s - F_t||_F.
double aligned_distance(const JointEmbedding& embedding);

/// 2N rows: `domain,e0..e{d-1}` with domain "source" then "target".
void write_embedding_csv(const JointEmbedding& embedding, const std::filesystem::path& path);

// --- Detector-level configuration ---------------------------------------------------------

enum class FeatureScaling {
    none,        ///< raw magnitudes
    center,      ///< subtract the training column means from both domains
    standardize, ///< centre, then divide by the training column std (zero-variance columns -> 0)
};

std::string_view to_string(FeatureScaling s) noexcept;
FeatureScaling parse_feature_scaling(std::string_view text);

struct AlignmentConfig {
    double mu = 0.5;
    Eigen::Index embed_dim = 10; ///< upper bound; capped by the smaller retained rank
    double lambda = 1.0;
    FeatureScaling scaling = FeatureScaling::center;

    void validate() const;
};

/// Applies `scaling` using statistics of `source` only. Rows are truncated to the shorter matrix.
void scale_features(Eigen::MatrixXd& source, Eigen::MatrixXd& target, FeatureScaling scaling);

struct AlignedScore {
    double distance = 0.0;
    Eigen::Index dim = 0;
    Eigen::Index source_rank = 0;
    Eigen::Index target_rank = 0;
    JointEmbedding embedding;
};

/// Scales, fits both coefficient matrices and embeds with d = clamp(min(embed_dim, ranks), 1, 2N).
AlignedScore aligned_score(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                           const AlignmentConfig& config);

} // namespace dapm
