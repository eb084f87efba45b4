#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "hydrostore/errors.hpp"
#include "hydrostore/grid.hpp"
#include "oracles.hpp"

using namespace hydrostore;

TEST_CASE("grid layout and node ordering") {
    const auto g = Grid::rectangle(4, 3, 2.0, 1.5);
    CHECK(g->dim() == 2);
    CHECK(g->node_count() == 20);
    CHECK(g->spacing(0) == 0.5);
    CHECK(g->node(2, 1) == 7);
    const auto [x, y] = g->coordinate(7);
    CHECK(x == doctest::Approx(1.0));
    CHECK(y == doctest::Approx(0.5));
    CHECK(g->measure() == doctest::Approx(3.0));
    CHECK(g->weights().sum() == doctest::Approx(3.0));
    CHECK(g->boundary_weights().sum() == doctest::Approx(7.0));
    CHECK_THROWS_AS(Grid::line(0, 1.0), ValidationError);
    CHECK_THROWS_AS(Grid::line(4, -1.0), ValidationError);
    CHECK(Grid::line(4, 1.0)->boundary_weights().sum() == 2.0);
}

TEST_CASE("field construction checks size") {
    const auto g = Grid::line(4, 1.0);
    CHECK_THROWS_AS(Field(g, Vector::Zero(3)), ValidationError);
    const Field f = Field::from_function(g, [](double x, double) { return 2 * x; });
    CHECK(f.max() == doctest::Approx(2.0));
}

TEST_CASE("assemble_operator: constants in the Neumann kernel") {
    const auto g = Grid::line(3, 1.0);
    const auto a = assemble_operator(g, 0.0);
    CHECK(a.apply(Vector::Constant(4, 2.5)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("assemble_operator: DiscreteOperator invariants in 1D and 2D") {
    for (const auto& g : {Grid::line(7, 1.3), Grid::rectangle(5, 4, 1.0, 2.0)}) {
        for (double gamma : {0.0, 0.7}) {
            const auto op = assemble_operator(g, gamma);
            const Eigen::MatrixXd m(op.matrix());
            CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
            for (Index i = 0; i < m.rows(); ++i)
                for (Index j = 0; j < m.cols(); ++j)
                    if (i != j) REQUIRE(m(i, j) <= 0.0);
            const Eigen::VectorXd rows = m.rowwise().sum();
            if (gamma == 0.0)
                CHECK(rows.cwiseAbs().maxCoeff() <= 1e-12);
            else
                CHECK(rows.minCoeff() >= -1e-12);
            const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
            CHECK(eig.minCoeff() >= -1e-12);
            if (gamma > 0.0) CHECK(eig.minCoeff() > 1e-6);
        }
    }
}

TEST_CASE("assemble_operator: 1D matches the independent dense assembly") {
    const auto op = assemble_operator(Grid::line(8, 1.0), 1.0);
    const Eigen::MatrixXd m(op.matrix());
    CHECK((m - oracle::laplacian_1d(8, 1.0, 1.0)).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    CHECK(eig.minCoeff() > 0.0);
}

TEST_CASE("2D operator integrates the gradient form of a bilinear function") {
    const auto g = Grid::rectangle(6, 4, 1.5, 1.0);
    const auto op = assemble_operator(g, 0.0);
    const Field v = Field::from_function(g, [](double x, double y) { return 2 * x + 3 * y; });
    // |grad v|^2 = 13 everywhere, integral = 13 |Omega|
    CHECK(op.form(v.values, v.values) == doctest::Approx(13 * 1.5).epsilon(1e-12));
}

TEST_CASE("integrate examples") {
    CHECK(integrate(Field::constant(Grid::line(5, 2.0), 1.0)) == doctest::Approx(2.0));
    CHECK(integrate(Field::constant(Grid::line(5, 2.0), 0.0)) == 0.0);
    const Field x = Field::from_function(Grid::line(64, 1.0), [](double s, double) { return s; });
    CHECK(std::abs(integrate(x) - 0.5) <= 1e-3);
    const auto g = Grid::line(9, 1.0);
    const Field a = Field::from_function(g, [](double s, double) { return std::sin(s); });
    const Field b = Field::from_function(g, [](double s, double) { return s * s; });
    CHECK(integrate(Field(g, 2.0 * a.values + b.values)) ==
          doctest::Approx(2 * integrate(a) + integrate(b)).epsilon(1e-14));
}

TEST_CASE("operator properties on random fields") {
    std::mt19937_64 rng(17);
    for (const auto& g : {Grid::line(16, 1.0), Grid::rectangle(6, 5, 1.0, 0.8)}) {
        const auto a0 = assemble_operator(g, 0.0);
        const auto ag = assemble_operator(g, 2.0);
        const Vector ones = Vector::Ones(g->node_count());
        for (int k = 0; k < 50; ++k) {
            const Vector v = oracle::random_vector(rng, g->node_count(), -1, 1);
            const Vector w = oracle::random_vector(rng, g->node_count(), -1, 1);
            REQUIRE(std::abs(ag.form(v, w) - ag.form(w, v)) <= 1e-12);
            REQUIRE(ag.form(v, v) >= 0.0);
            REQUIRE(a0.form(v, v) > 0.0);
            REQUIRE(std::abs(a0.form(v, ones)) <= 1e-12);
        }
        CHECK(std::abs(a0.form(ones, ones)) <= 1e-12);
    }
}

TEST_CASE("solve_shifted examples") {
    const auto g = Grid::line(16, 1.0);
    const auto a0 = assemble_operator(g, 0.0);
    const Vector c = Vector::Constant(17, 3.0);
    CHECK((solve_shifted(a0, 1.0, c) - c).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(solve_shifted(a0, 0.0, c), SingularSystemError);
    CHECK_THROWS_AS(solve_shifted(a0, -1.0, c), DomainError);

    Vector rhs(17);
    for (int i = 0; i <= 16; ++i) rhs[i] = std::sin(std::numbers::pi * i / 16.0);
    const Vector v = solve_shifted(a0, 1.0, rhs);
    Eigen::MatrixXd dense = oracle::laplacian_1d(16, 1.0, 0.0);
    dense.diagonal().array() += 1.0;
    CHECK((v - oracle::solve(dense, rhs)).cwiseAbs().maxCoeff() <= 1e-8);

    // shift vanishing on part of the domain is fine as long as it is positive somewhere
    Vector shift = Vector::Zero(17);
    shift[3] = 1.0;
    const Vector sv = solve_shifted(a0, shift, rhs);
    CHECK((a0.apply(sv) + shift.cwiseProduct(sv) - rhs).norm() <= 1e-10 * rhs.norm());

    const auto ag = assemble_operator(g, 1.0);
    const Vector z = solve_shifted(ag, 0.0, rhs);
    CHECK((ag.apply(z) - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("solve_shifted is inverse positive") {
    std::mt19937_64 rng(23);
    const auto g = Grid::rectangle(7, 6, 1.0, 1.0);
    const auto a = assemble_operator(g, 0.0);
    for (int k = 0; k < 20; ++k) {
        const Vector shift = oracle::random_vector(rng, g->node_count(), 1e-3, 2.0);
        Vector rhs = oracle::random_vector(rng, g->node_count(), 0.0, 1.0);
        for (Index i = 0; i < rhs.size(); ++i)
            if (i % 3 != 0) rhs[i] = 0.0;
        REQUIRE(solve_shifted(a, shift, rhs).minCoeff() >= 0.0);
    }
}

TEST_CASE("dual_norm examples") {
    const auto g = Grid::line(16, 1.0);
    CHECK(dual_norm(Field::constant(g, 0.0), 1.0).value == 0.0);
    CHECK_THROWS_AS(dual_norm(Field::constant(g, 1.0), 0.0), DomainError);

    const Field u = Field::from_function(g, [](double x, double) { return 1 + x * x; });
    const double d1 = dual_norm(u, 1.0).value;
    const double d2 = dual_norm(Field(g, 2.0 * u.values), 1.0).value;
    CHECK(d2 == doctest::Approx(2 * d1).epsilon(1e-12));

    const oracle::Vec w = oracle::weights_1d(16, 1.0);
    const oracle::Vec zeta = oracle::solve(oracle::laplacian_1d(16, 1.0, 1.0), w);
    const double expect = std::sqrt(w.dot(zeta));
    CHECK(std::abs(dual_norm(Field::constant(g, 1.0), 1.0).value - expect) <= 1e-8);
}
