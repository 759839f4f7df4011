#include "dapm/alignment.hpp"

#include "dapm/error.hpp"
#include "dapm/linalg.hpp"
#include "dapm/text_io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

namespace dapm {

ReconstructionCoeffs lre_coefficients(const Eigen::MatrixXd& features, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("lambda must be a positive finite number");
    }
    if (features.rows() == 0) {
        throw ParameterError("reconstruction needs at least one frame");
    }
    if (!features.allFinite()) {
        throw ParameterError("feature matrix contains non-finite values");
    }
    const Eigen::Index n = features.rows();
    ReconstructionCoeffs out;
    out.R = Eigen::MatrixXd::Zero(n, n);
    if (features.cols() == 0) {
        return out;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(features, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cut = std::sqrt(lambda);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    out.retained_rank = r;
    if (r == 0) {
        return out;
    }
    const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    const Eigen::VectorXd w = (1.0 - lambda * s.head(r).array().square().inverse()).matrix();
    out.R = u * w.asDiagonal() * u.transpose();
    out.R = 0.5 * (out.R + out.R.transpose()).eval();
    return out;
}

double lre_objective(const Eigen::MatrixXd& features, const Eigen::MatrixXd& R, double lambda) {
    if (R.rows() != features.rows() || R.cols() != features.rows()) {
        throw ParameterError("coefficient matrix must be " + std::to_string(features.rows()) + " x " +
                             std::to_string(features.rows()));
    }
    const Eigen::MatrixXd xt = features.transpose();
    const double fit = 0.5 * (xt - xt * R).squaredNorm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    return fit + lambda * svd.singularValues().sum();
}

Eigen::MatrixXd block_reconstruction(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target) {
    if (source.rows() != source.cols() || target.rows() != target.cols() || source.rows() != target.rows()) {
        throw ParameterError("coefficient blocks must be square and of equal size");
    }
    const Eigen::Index n = source.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = source;
    out.bottomRightCorner(n, n) = target;
    return out;
}

Eigen::MatrixXd correspondence_laplacian(Eigen::Index n) {
    if (n < 0) throw ParameterError("negative size");
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    l.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    l.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return l;
}

Eigen::MatrixXd alignment_cost(const Eigen::MatrixXd& source_coeffs, const Eigen::MatrixXd& target_coeffs,
                               double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw ParameterError("mu must lie in [0, 1]");
    }
    const Eigen::MatrixXd r = block_reconstruction(source_coeffs, target_coeffs);
    const Eigen::Index n2 = r.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n2, n2) - r;
    Eigen::MatrixXd m = (1.0 - mu) * (a.transpose() * a) + (2.0 * mu) * correspondence_laplacian(n2 / 2);
    return 0.5 * (m + m.transpose());
}

namespace {

// Replaces the basis of each block of (numerically) equal eigenvalues by the orthonormalised
// projections of e_0, e_1, ... onto that eigenspace.
void canonicalise_ties(const Eigen::VectorXd& values, Eigen::MatrixXd& vectors, Eigen::Index needed) {
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    const double tol = 1e-10 * scale;
    const Eigen::Index total = values.size();
    Eigen::Index start = 0;
    while (start < needed) {
        Eigen::Index end = start + 1;
        while (end < total && values(end) - values(end - 1) < tol) ++end;
        const Eigen::Index g = end - start;
        if (g > 1) {
            const Eigen::MatrixXd block = vectors.middleCols(start, g);
            Eigen::MatrixXd basis(vectors.rows(), g);
            Eigen::Index found = 0;
            for (Eigen::Index k = 0; k < vectors.rows() && found < g; ++k) {
                Eigen::VectorXd v = block * block.row(k).transpose();
                for (Eigen::Index j = 0; j < found; ++j) v -= basis.col(j).dot(v) * basis.col(j);
                for (Eigen::Index j = 0; j < found; ++j) v -= basis.col(j).dot(v) * basis.col(j);
                const double norm = v.norm();
                if (norm > 1e-6) basis.col(found++) = v / norm;
            }
            if (found == g) vectors.middleCols(start, g) = basis;
        }
        start = end;
    }
}

} // namespace

JointEmbedding joint_embed_from_coeffs(const Eigen::MatrixXd& source_coeffs, const Eigen::MatrixXd& target_coeffs,
                                       double mu, Eigen::Index dim) {
    const Eigen::MatrixXd m = alignment_cost(source_coeffs, target_coeffs, mu);
    const Eigen::Index n2 = m.rows();
    if (dim < 1 || dim > n2) {
        throw ParameterError("embedding dimension " + std::to_string(dim) + " outside [1, " + std::to_string(n2) +
                             "]");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
        throw ParameterError("eigendecomposition of the alignment cost failed");
    }
    Eigen::MatrixXd vectors = es.eigenvectors();
    canonicalise_ties(es.eigenvalues(), vectors, dim);
    Eigen::MatrixXd f = vectors.leftCols(dim);
    fix_column_signs(f);

    const Eigen::Index n = n2 / 2;
    JointEmbedding out;
    out.source = f.topRows(n);
    out.target = f.bottomRows(n);
    out.eigenvalues = es.eigenvalues().head(dim);
    out.mu = mu;
    out.dim = dim;
    return out;
}

JointEmbedding joint_embed(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double mu,
                           Eigen::Index dim, double lambda) {
    if (source.cols() != target.cols()) {
        throw ParameterError("feature count mismatch: " + std::to_string(source.cols()) + " vs " +
                             std::to_string(target.cols()));
    }
    Eigen::MatrixXd xs = source;
    Eigen::MatrixXd xt = target;
    truncate_to_common_rows(xs, xt);
    return joint_embed_from_coeffs(lre_coefficients(xs, lambda).R, lre_coefficients(xt, lambda).R, mu, dim);
}

double aligned_distance(const JointEmbedding& embedding) {
    return (embedding.source - embedding.target).norm();
}

void write_embedding_csv(const JointEmbedding& embedding, const std::filesystem::path& path) {
    std::string out = "domain";
    for (Eigen::Index c = 0; c < embedding.dim; ++c) out += ",e" + std::to_string(c);
    out += '\n';
    const auto emit = [&](std::string_view tag, const Eigen::MatrixXd& rows) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            out += tag;
            for (Eigen::Index c = 0; c < rows.cols(); ++c) out += "," + format_double(rows(r, c));
            out += '\n';
        }
    };
    emit("source", embedding.source);
    emit("target", embedding.target);
    write_text_file(path, out);
}

std::string_view to_string(FeatureScaling s) noexcept {
    switch (s) {
    case FeatureScaling::none: return "none";
    case FeatureScaling::center: return "center";
    case FeatureScaling::standardize: return "standardize";
    }
    return "center";
}

FeatureScaling parse_feature_scaling(std::string_view text) {
    if (text == "none") return FeatureScaling::none;
    if (text == "center") return FeatureScaling::center;
    if (text == "standardize") return FeatureScaling::standardize;
    throw ParameterError("unknown feature scaling '" + std::string(text) + "' (none|center|standardize)");
}

void AlignmentConfig::validate() const {
    if (!(mu >= 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in [0, 1]");
    if (embed_dim < 1) throw ParameterError("embedding dimension must be >= 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
}

void scale_features(Eigen::MatrixXd& source, Eigen::MatrixXd& target, FeatureScaling scaling) {
    if (source.cols() != target.cols()) {
        throw ParameterError("feature count mismatch: " + std::to_string(source.cols()) + " vs " +
                             std::to_string(target.cols()));
    }
    truncate_to_common_rows(source, target);
    if (scaling == FeatureScaling::none || source.rows() == 0) return;

    const Eigen::RowVectorXd mean = source.colwise().mean();
    source.rowwise() -= mean;
    target.rowwise() -= mean;
    if (scaling != FeatureScaling::standardize) return;

    const double denom = source.rows() > 1 ? static_cast<double>(source.rows() - 1) : 1.0;
    const Eigen::RowVectorXd sd = (source.colwise().squaredNorm() / denom).cwiseSqrt();
    for (Eigen::Index c = 0; c < source.cols(); ++c) {
        if (sd(c) > 0.0) {
            source.col(c) /= sd(c);
            target.col(c) /= sd(c);
        } else {
            source.col(c).setZero();
            target.col(c).setZero();
        }
    }
}

AlignedScore aligned_score(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                           const AlignmentConfig& config) {
    config.validate();
    Eigen::MatrixXd xs = source;
    Eigen::MatrixXd xt = target;
    scale_features(xs, xt, config.scaling);
    if (xs.rows() == 0) throw ParameterError("alignment needs at least one frame");

    const auto rs = lre_coefficients(xs, config.lambda);
    const auto rt = lre_coefficients(xt, config.lambda);
    const Eigen::Index cap = 2 * xs.rows();
    const Eigen::Index d = std::clamp(std::min({config.embed_dim, rs.retained_rank, rt.retained_rank}),
                                      Eigen::Index{1}, cap);

    AlignedScore out;
    out.embedding = joint_embed_from_coeffs(rs.R, rt.R, config.mu, d);
    out.distance = aligned_distance(out.embedding);
    out.dim = d;
    out.source_rank = rs.retained_rank;
    out.target_rank = rt.retained_rank;
    return out;
}

} // namespace dapm
