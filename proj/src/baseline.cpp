#include "dapm/baseline.hpp"

#include "dapm/error.hpp"
#include "dapm/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace dapm {

std::string_view to_string(Verdict v) noexcept {
    return v == Verdict::anomalous ? "anomalous" : "healthy";
}

namespace {

struct CentredSvd {
    Eigen::VectorXd mean;
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd right_vectors;
};

CentredSvd centred_svd(const Eigen::MatrixXd& x) {
    if (x.rows() == 0 || x.cols() == 0) {
        throw ParameterError("PCA needs a non-empty training matrix");
    }
    if (!x.allFinite()) {
        throw ParameterError("PCA training matrix contains non-finite values");
    }
    CentredSvd out;
    out.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centred = x.rowwise() - out.mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    out.right_vectors = svd.matrixV();
    return out;
}

} // namespace

Eigen::Index components_for_variance(const Eigen::MatrixXd& training, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ParameterError("explained-variance fraction must lie in (0, 1]");
    }
    const auto svd = centred_svd(training);
    const Eigen::VectorXd var = svd.singular_values.array().square();
    const double total = var.sum();
    const Eigen::Index cap = std::min(training.rows(), training.cols());
    if (total <= 0.0) {
        return 1;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < var.size(); ++i) {
        acc += var(i);
        if (acc >= fraction * total * (1.0 - 1e-12)) {
            return std::min(i + 1, cap);
        }
    }
    return cap;
}

PcaModel fit_pca(const Eigen::MatrixXd& training, Eigen::Index p) {
    const Eigen::Index cap = std::min(training.rows(), training.cols());
    if (p < 1 || p > cap) {
        throw ParameterError("component count " + std::to_string(p) + " outside [1, " + std::to_string(cap) + "]");
    }
    const auto svd = centred_svd(training);
    const double denom = training.rows() > 1 ? static_cast<double>(training.rows() - 1) : 1.0;

    PcaModel model;
    model.mean = svd.mean;
    model.components = svd.right_vectors.leftCols(p);
    fix_column_signs(model.components);
    model.explained_variance = svd.singular_values.head(p).array().square() / denom;
    model.total_variance = svd.singular_values.squaredNorm() / denom;
    return model;
}

double pca_distance(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, const PcaModel& model) {
    if (source.cols() != model.components.rows() || target.cols() != model.components.rows()) {
        throw ParameterError("feature count mismatch: source " + std::to_string(source.cols()) + ", target " +
                             std::to_string(target.cols()) + ", model " + std::to_string(model.components.rows()));
    }
    const Eigen::Index n = std::min(source.rows(), target.rows());
    // The shared training mean cancels in the difference of projections.
    const Eigen::MatrixXd diff = (source.topRows(n) - target.topRows(n)) * model.components;
    return diff.squaredNorm();
}

Verdict pca_hypothesis_test(double distance, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw ParameterError("threshold must be > 0");
    }
    return distance > epsilon ? Verdict::anomalous : Verdict::healthy;
}

nlohmann::json to_json(const PcaModel& model) {
    nlohmann::json j;
    j["n_features"] = model.components.rows();
    j["n_components"] = model.components.cols();
    j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
    j["explained_variance"] = std::vector<double>(model.explained_variance.data(),
                                                  model.explained_variance.data() + model.explained_variance.size());
    j["total_variance"] = model.total_variance;
    auto& comps = j["components"] = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.components.cols(); ++c) {
        const Eigen::VectorXd col = model.components.col(c);
        comps.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    return j;
}

PcaModel pca_model_from_json(const nlohmann::json& j) {
    try {
        const auto k = j.at("n_features").get<Eigen::Index>();
        const auto p = j.at("n_components").get<Eigen::Index>();
        const auto mean = j.at("mean").get<std::vector<double>>();
        const auto var = j.at("explained_variance").get<std::vector<double>>();
        const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
        if (static_cast<Eigen::Index>(mean.size()) != k || static_cast<Eigen::Index>(var.size()) != p ||
            static_cast<Eigen::Index>(comps.size()) != p) {
            throw FormatError("PCA model dimensions inconsistent");
        }
        PcaModel m;
        m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), k);
        m.explained_variance = Eigen::Map<const Eigen::VectorXd>(var.data(), p);
        m.total_variance = j.at("total_variance").get<double>();
        m.components.resize(k, p);
        for (Eigen::Index c = 0; c < p; ++c) {
            if (static_cast<Eigen::Index>(comps[static_cast<std::size_t>(c)].size()) != k) {
                throw FormatError("PCA component length mismatch");
            }
            m.components.col(c) = Eigen::Map<const Eigen::VectorXd>(comps[static_cast<std::size_t>(c)].data(), k);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PCA model: ") + e.what());
    }
}

} // namespace dapm
