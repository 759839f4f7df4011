#include "dapm/alignment.hpp"
#include "dapm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <limits>
#include <random>

using namespace dapm;

TEST_SUITE("alignment") {

TEST_CASE("diagonal example keeps sigma = 2 only") {
    Eigen::MatrixXd x(2, 2);
    x << 2, 0, 0, 0.5;
    const auto c = lre_coefficients(x);
    CHECK(c.retained_rank == 1);
    Eigen::MatrixXd expect(2, 2);
    expect << 0.75, 0, 0, 0;
    CHECK((c.R - expect).norm() <= 1e-14);
}

TEST_CASE("zero input gives zero coefficients") {
    const auto c = lre_coefficients(Eigen::MatrixXd::Zero(5, 3));
    CHECK(c.retained_rank == 0);
    CHECK(c.R.isZero(0.0));
    CHECK(c.R.rows() == 5);
}

TEST_CASE("non-finite input is rejected") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 3);
    x(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lre_coefficients(x), ParameterError);
    x(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(lre_coefficients(x), ParameterError);
    CHECK_THROWS_AS(lre_coefficients(Eigen::MatrixXd::Ones(3, 3), 0.0), ParameterError);
}

TEST_CASE("closed form matches a proximal-gradient solver") {
    std::mt19937_64 g(10);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(10, 6, 0.8, g);
    const auto c = lre_coefficients(x);
    CHECK(c.retained_rank >= 2);
    const double closed = oracle::lre_objective(x, c.R, 1.0);
    const double iterative = oracle::lre_proximal_gradient(x, 1.0, 10000);
    CHECK(closed <= iterative + 1e-6);
    CHECK(std::abs(closed - iterative) <= 1e-6);
    CHECK(lre_objective(x, c.R) == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("general lambda thresholds at sqrt(lambda)") {
    std::mt19937_64 g(11);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(8, 5, 1.5, g);
    for (double lambda : {0.5, 2.0, 4.0}) {
        const auto c = lre_coefficients(x, lambda);
        CHECK(oracle::lre_objective(x, c.R, lambda) <= oracle::lre_proximal_gradient(x, lambda, 4000) + 1e-6);
    }
}

TEST_CASE("spectrum of R") {
    std::mt19937_64 g(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = oracle::gaussian_matrix(4 + trial % 9, 2 + trial % 7, 0.3 + 0.2 * (trial % 6), g);
        const auto c = lre_coefficients(x);
        CHECK((c.R - c.R.transpose()).norm() <= 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.R);
        const Eigen::VectorXd ev = es.eigenvalues().reverse();
        CHECK(ev.minCoeff() >= -1e-12);
        CHECK(ev.maxCoeff() < 1.0);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
        const Eigen::VectorXd s = svd.singularValues();
        Eigen::Index expected_rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) expected_rank += s(i) > 1.0;
        CHECK(c.retained_rank == expected_rank);
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            const double want = i < expected_rank ? 1.0 - 1.0 / (s(i) * s(i)) : 0.0;
            CHECK(std::abs(ev(i) - want) <= 1e-10);
        }
    }
}

TEST_CASE("block reconstruction") {
    const auto id = block_reconstruction(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3));
    CHECK(id == Eigen::MatrixXd::Identity(6, 6));
    CHECK(block_reconstruction(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)).isZero(0.0));
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4), b = Eigen::MatrixXd::Random(4, 4);
    const auto r = block_reconstruction(a, b);
    CHECK(r.topLeftCorner(4, 4) == a);
    CHECK(r.bottomRightCorner(4, 4) == b);
    CHECK(r.topRightCorner(4, 4).isZero(0.0));
    CHECK(r.bottomLeftCorner(4, 4).isZero(0.0));
    CHECK_THROWS_AS(block_reconstruction(a, Eigen::MatrixXd::Random(3, 3)), ParameterError);
    CHECK_THROWS_AS(block_reconstruction(Eigen::MatrixXd::Random(4, 3), Eigen::MatrixXd::Random(4, 3)), ParameterError);
}

TEST_CASE("correspondence Laplacian") {
    Eigen::MatrixXd l1(2, 2);
    l1 << 1, -1, -1, 1;
    CHECK(correspondence_laplacian(1) == l1);
    for (Eigen::Index n : {2, 5, 9}) {
        const auto l = correspondence_laplacian(n);
        const Eigen::VectorXd v = Eigen::VectorXd::Random(n);
        Eigen::VectorXd pair(2 * n);
        pair << v, v;
        CHECK((l * pair).norm() <= 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
        CHECK(es.eigenvalues().head(n).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((es.eigenvalues().tail(n).array() - 2.0).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("identical inputs give symmetric eigenvectors and zero distance") {
    std::mt19937_64 g(13);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(9, 5, 1.0, g);
    const auto e = joint_embed(x, x, 0.5, 2);
    CHECK((e.source - e.target).norm() <= 1e-8);
    CHECK(aligned_distance(e) <= 1e-8);
}

TEST_CASE("mu = 1 reduces to the correspondence term") {
    std::mt19937_64 g(14);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(7, 4, 2.0, g);
    const Eigen::MatrixXd xt = oracle::gaussian_matrix(7, 4, 2.0, g);
    for (Eigen::Index d : {1, 3, 7}) {
        const auto e = joint_embed(xs, xt, 1.0, d);
        CHECK(aligned_distance(e) <= 1e-8);
        CHECK(e.eigenvalues.cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("eigenpair residuals, ordering and orthonormality") {
    std::mt19937_64 g(15);
    for (double mu : {0.0, 0.2, 0.5, 0.8}) {
        const Eigen::MatrixXd xs = oracle::gaussian_matrix(10, 6, 1.0, g);
        const Eigen::MatrixXd xt = oracle::gaussian_matrix(10, 6, 1.0, g);
        const auto e = joint_embed(xs, xt, mu, 6);
        const auto m = alignment_cost(lre_coefficients(xs).R, lre_coefficients(xt).R, mu);
        Eigen::MatrixXd f(20, 6);
        f << e.source, e.target;
        for (Eigen::Index j = 0; j < 6; ++j) {
            CHECK((m * f.col(j) - e.eigenvalues(j) * f.col(j)).norm() <= 1e-8 * std::max(1.0, m.norm()));
            if (j) CHECK(e.eigenvalues(j) >= e.eigenvalues(j - 1));
            CHECK(e.eigenvalues(j) >= -1e-10);
        }
        CHECK((f.transpose() * f - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-8);
    }
}

TEST_CASE("alignment cost is symmetric positive semidefinite") {
    std::mt19937_64 g(16);
    for (double mu : {0.0, 0.3, 1.0}) {
        const auto m = alignment_cost(lre_coefficients(oracle::gaussian_matrix(6, 4, 1.5, g)).R,
                                      lre_coefficients(oracle::gaussian_matrix(6, 4, 1.5, g)).R, mu);
        CHECK((m - m.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("swapping source and target leaves the distance unchanged") {
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd xs = oracle::gaussian_matrix(8, 5, 1.2, g);
        const Eigen::MatrixXd xt = oracle::gaussian_matrix(8, 5, 1.2, g);
        const double mu = 0.1 + 0.08 * trial;
        CHECK(aligned_distance(joint_embed(xs, xt, mu, 3)) ==
              doctest::Approx(aligned_distance(joint_embed(xt, xs, mu, 3))).epsilon(1e-8));
    }
}

TEST_CASE("degenerate eigenspaces get a basis independent of the input order") {
    // mu = 1: the whole [v; v] nullspace is one tie block.
    const auto e = joint_embed_from_coeffs(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3), 1.0, 3);
    const double r = 1.0 / std::sqrt(2.0);
    for (Eigen::Index j = 0; j < 3; ++j) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(e.source(i, j) == doctest::Approx(i == j ? r : 0.0));
            CHECK(e.target(i, j) == doctest::Approx(i == j ? r : 0.0));
        }
    }
}

TEST_CASE("rows are truncated to the shorter domain") {
    std::mt19937_64 g(18);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(9, 4, 1.0, g);
    const Eigen::MatrixXd xt = oracle::gaussian_matrix(12, 4, 1.0, g);
    const auto e = joint_embed(xs, xt, 0.5, 2);
    CHECK(e.source.rows() == 9);
    CHECK(aligned_distance(e) == doctest::Approx(aligned_distance(joint_embed(xs, xt.topRows(9), 0.5, 2))));
}

TEST_CASE("parameter errors") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
    CHECK_THROWS_AS(joint_embed(x, x, -0.1, 2), ParameterError);
    CHECK_THROWS_AS(joint_embed(x, x, 1.1, 2), ParameterError);
    CHECK_THROWS_AS(joint_embed(x, x, 0.5, 0), ParameterError);
    CHECK_THROWS_AS(joint_embed(x, x, 0.5, 11), ParameterError);
    CHECK_NOTHROW(joint_embed(x, x, 0.5, 10));
    CHECK_THROWS_AS(joint_embed(x, Eigen::MatrixXd::Random(5, 4), 0.5, 2), ParameterError);
    AlignmentConfig c;
    c.embed_dim = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK_THROWS_AS(parse_feature_scaling("zscore"), ParameterError);
}

TEST_CASE("aligned distance examples") {
    JointEmbedding e;
    e.source = Eigen::MatrixXd::Random(4, 2);
    e.target = e.source;
    e.dim = 2;
    CHECK(aligned_distance(e) == 0.0);
    e.target(2, 1) += -0.625;
    CHECK(aligned_distance(e) == doctest::Approx(0.625));

    std::mt19937_64 g(19);
    e.source = oracle::gaussian_matrix(6, 3, 1.0, g);
    e.target = oracle::gaussian_matrix(6, 3, 1.0, g);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) sq += (e.source(i, j) - e.target(i, j)) * (e.source(i, j) - e.target(i, j));
    CHECK(aligned_distance(e) * aligned_distance(e) == doctest::Approx(sq).epsilon(1e-14));
}

TEST_CASE("feature scaling uses training statistics only") {
    Eigen::MatrixXd s(3, 2), t(4, 2);
    s << 1, 5, 2, 5, 3, 5;
    t << 4, 6, 5, 7, 6, 8, 9, 9;
    Eigen::MatrixXd a = s, b = t;
    scale_features(a, b, FeatureScaling::center);
    CHECK(b.rows() == 3);
    CHECK(a.col(0).sum() == doctest::Approx(0.0));
    CHECK(b(0, 0) == doctest::Approx(2.0));
    CHECK(b(0, 1) == doctest::Approx(1.0));

    a = s;
    b = t;
    scale_features(a, b, FeatureScaling::standardize);
    CHECK(b(0, 0) == doctest::Approx(2.0));
    CHECK(a.col(1).isZero(0.0));
    CHECK(b.col(1).isZero(0.0));

    a = s;
    b = t;
    scale_features(a, b, FeatureScaling::none);
    CHECK(a == s);
    CHECK(b == t.topRows(3));
}

TEST_CASE("aligned score caps the dimension at the retained rank") {
    std::mt19937_64 g(20);
    const Eigen::MatrixXd xs = oracle::gaussian_matrix(8, 6, 1.0, g);
    const Eigen::MatrixXd xt = oracle::gaussian_matrix(8, 6, 1.0, g);
    AlignmentConfig cfg;
    const auto s = aligned_score(xs, xt, cfg);
    CHECK(s.dim == std::max<Eigen::Index>(1, std::min({cfg.embed_dim, s.source_rank, s.target_rank})));
    CHECK(s.distance == doctest::Approx(aligned_distance(s.embedding)));
}

TEST_CASE("embedding CSV export") {
    const auto dir = testutil::scratch_dir("embed");
    std::mt19937_64 g(21);
    const auto e = joint_embed(oracle::gaussian_matrix(5, 3, 1.0, g), oracle::gaussian_matrix(5, 3, 1.0, g), 0.5, 2);
    write_embedding_csv(e, dir / "e.csv");
    std::ifstream in(dir / "e.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "domain,e0,e1");
    int source = 0, target = 0;
    while (std::getline(in, line)) {
        source += line.rfind("source,", 0) == 0;
        target += line.rfind("target,", 0) == 0;
    }
    CHECK(source == 5);
    CHECK(target == 5);
}

} // TEST_SUITE
