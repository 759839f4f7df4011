#include "dapm/baseline.hpp"
#include "dapm/detect.hpp"
#include "dapm/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace dapm;

TEST_SUITE("baseline") {

TEST_CASE("points on a line through the mean give that direction") {
    std::mt19937_64 g(1);
    std::normal_distribution<double> nd;
    Eigen::VectorXd dir(5);
    dir << 1, -2, 0.5, 3, 0;
    dir.normalize();
    Eigen::VectorXd mean(5);
    mean << 10, 0, -4, 2, 7;
    Eigen::MatrixXd x(40, 5);
    for (int i = 0; i < 40; ++i) x.row(i) = (mean + nd(g) * dir + 1e-4 * oracle::gaussian_matrix(5, 1, 1.0, g)).transpose();
    const auto m = fit_pca(x, 1);
    CHECK(std::abs(m.components.col(0).dot(dir)) > 0.9999);
    CHECK(m.explained_variance(0) / m.total_variance >= 0.999);
    CHECK(components_for_variance(x, 0.95) == 1);
}

TEST_CASE("identical rows have zero variance") {
    Eigen::MatrixXd x = Eigen::RowVectorXd::LinSpaced(4, 1, 4).replicate(6, 1);
    const auto m = fit_pca(x, 1);
    CHECK(m.explained_variance(0) == doctest::Approx(0.0));
    CHECK(m.components.col(0).norm() == doctest::Approx(1.0));
    CHECK(components_for_variance(x, 0.95) == 1);
}

TEST_CASE("full-rank components reconstruct the data") {
    std::mt19937_64 g(2);
    for (auto [n, k] : {std::pair{8, 5}, std::pair{5, 8}, std::pair{12, 12}}) {
        const Eigen::MatrixXd x = oracle::gaussian_matrix(n, k, 1.0, g);
        const Eigen::Index p = std::min(n, k);
        const auto m = fit_pca(x, p);
        CHECK((m.components.transpose() * m.components - Eigen::MatrixXd::Identity(p, p)).norm() <= 1e-10);
        const Eigen::MatrixXd c = x.rowwise() - m.mean.transpose();
        const Eigen::MatrixXd rec = (c * m.components * m.components.transpose()).rowwise() + m.mean.transpose();
        CHECK((rec - x).norm() <= 1e-8);
        for (Eigen::Index i = 1; i < p; ++i) CHECK(m.explained_variance(i) <= m.explained_variance(i - 1));
        for (Eigen::Index c2 = 0; c2 < p; ++c2) {
            Eigen::Index at;
            m.components.col(c2).cwiseAbs().maxCoeff(&at);
            CHECK(m.components(at, c2) > 0.0);
        }
    }
}

TEST_CASE("component count out of range") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
    CHECK_THROWS_AS(fit_pca(x, 0), ParameterError);
    CHECK_THROWS_AS(fit_pca(x, 4), ParameterError);
    CHECK_THROWS_AS(components_for_variance(x, 0.0), ParameterError);
}

TEST_CASE("distance examples") {
    std::mt19937_64 g(3);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(20, 6, 1.0, g);
    const auto m = fit_pca(xs, 2);
    CHECK(pca_distance(xs, xs, m) == 0.0);

    // A shift lying in the discarded components does not move the projection.
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(6, 6) - m.components * m.components.transpose();
    const Eigen::MatrixXd delta = oracle::gaussian_matrix(20, 6, 1.0, g) * proj;
    CHECK(pca_distance(xs, xs + delta, m) <= 1e-20);

    const double c = 0.37;
    const Eigen::MatrixXd shifted = xs.rowwise() + (c * m.components.col(0)).transpose();
    CHECK(pca_distance(xs, shifted, m) == doctest::Approx(20 * c * c).epsilon(1e-12));

    const Eigen::MatrixXd other = oracle::gaussian_matrix(20, 6, 1.0, g);
    CHECK(pca_distance(xs, other, m) == doctest::Approx(pca_distance(other, xs, m)).epsilon(1e-14));
    CHECK(pca_distance(xs, other, m) > 0.0);
}

TEST_CASE("projection idempotence") {
    std::mt19937_64 g(4);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(15, 7, 1.0, g);
    const Eigen::MatrixXd xt = oracle::gaussian_matrix(15, 7, 1.0, g);
    const auto m = fit_pca(xs, 3);
    const Eigen::MatrixXd pp = m.components * m.components.transpose();
    const auto project = [&](const Eigen::MatrixXd& x) {
        return Eigen::MatrixXd(((x.rowwise() - m.mean.transpose()) * pp).rowwise() + m.mean.transpose());
    };
    const double d = pca_distance(xs, xt, m);
    CHECK(std::abs(pca_distance(project(xs), project(xt), m) - d) <= 1e-10);
}

TEST_CASE("rows are truncated and feature counts must agree") {
    std::mt19937_64 g(5);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(10, 4, 1.0, g);
    const auto m = fit_pca(xs, 2);
    const Eigen::MatrixXd longer = oracle::gaussian_matrix(14, 4, 1.0, g);
    CHECK(pca_distance(xs, longer, m) == doctest::Approx(pca_distance(xs, longer.topRows(10), m)));
    CHECK_THROWS_AS(pca_distance(xs, oracle::gaussian_matrix(10, 5, 1.0, g), m), ParameterError);
}

TEST_CASE("hypothesis test") {
    CHECK(pca_hypothesis_test(0.0, 1.0) == Verdict::healthy);
    CHECK(pca_hypothesis_test(2.0, 1.0) == Verdict::anomalous);
    CHECK(pca_hypothesis_test(1.0, 1.0) == Verdict::healthy);
    CHECK_THROWS_AS(pca_hypothesis_test(1.0, 0.0), ParameterError);
}

TEST_CASE("empirical 95th percentile flags about 5% of held-out healthy days") {
    PipelineConfig cfg;
    ScenarioSchedule s;
    s.seed = 31;
    s.days.assign(201, DayKind::O1);
    const auto days = generate_scenario(s, 300);
    const auto train = trace_features(days[0].trace, cfg.stft);
    const auto m = fit_pca(train.data, components_for_variance(train.data, 0.95));
    std::vector<double> cal, held;
    for (std::size_t i = 1; i < days.size(); ++i) {
        (i <= 100 ? cal : held).push_back(pca_distance(train.data, trace_features(days[i].trace, cfg.stft).data, m));
    }
    std::sort(cal.begin(), cal.end());
    const double eps = cal[94];
    const auto flagged = std::count_if(held.begin(), held.end(),
                                       [&](double d) { return pca_hypothesis_test(d, eps) == Verdict::anomalous; });
    // Binomial(100, 0.05): +/- three standard deviations.
    CHECK(flagged <= 12);
}

TEST_CASE("O2 days are farther than healthy O1 days") {
    PipelineConfig cfg;
    const auto days = generate_scenario(ScenarioSchedule::reference(19), 300);
    const auto train = trace_features(days[0].trace, cfg.stft);
    const auto m = fit_pca(train.data, components_for_variance(train.data, 0.95));
    double max_o1 = 0.0, min_o2 = INFINITY;
    for (std::size_t i = 1; i < days.size(); ++i) {
        const double d = pca_distance(train.data, trace_features(days[i].trace, cfg.stft).data, m);
        if (days[i].kind == DayKind::O1) max_o1 = std::max(max_o1, d);
        if (days[i].kind == DayKind::O2) min_o2 = std::min(min_o2, d);
    }
    CHECK(min_o2 > max_o1);
}

TEST_CASE("model JSON round trip") {
    std::mt19937_64 g(6);
    const auto m = fit_pca(oracle::gaussian_matrix(9, 4, 1.0, g), 3);
    const auto back = pca_model_from_json(to_json(m));
    CHECK(back.components == m.components);
    CHECK(back.mean == m.mean);
    CHECK(back.explained_variance == m.explained_variance);
    CHECK(back.total_variance == m.total_variance);
    auto j = to_json(m);
    j["mean"].push_back(1.0);
    CHECK_THROWS_AS(pca_model_from_json(j), FormatError);
}

} // TEST_SUITE
