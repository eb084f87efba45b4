#include "hydrostore/grid.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

// Trapezoid factor along one axis: 1/2 on the two end nodes.
double end_factor(int i, int cells) { return (i == 0 || i == cells) ? 0.5 : 1.0; }

template <typename Solver>
bool refine_solve(const Solver& solver, const SparseMatrix& matrix, const Vector& rhs, double tol,
                  Vector& x) {
    const double scale = rhs.norm();
    x = solver.solve(rhs);
    for (int pass = 0; pass < 3; ++pass) {
        if (!x.allFinite()) return false;
        const Vector r = rhs - matrix * x;
        if (r.norm() <= tol * scale) return true;
        x += solver.solve(r);
    }
    if (!x.allFinite()) return false;
    // A residual at the rounding floor of |A||x| cannot be reduced further; accept
    // it when the requested relative tolerance lies below that floor.
    const double r = (rhs - matrix * x).norm();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         (matrix.cwiseAbs() * x.cwiseAbs()).norm();
    return r <= tol * scale || r <= floor;
}

}  // namespace

Grid::Grid(int dim, std::array<int, 2> cells, std::array<double, 2> lengths)
    : dim_(dim), cells_(cells), lengths_(lengths) {
    if (dim != 1 && dim != 2) throw ValidationError("grid.dim must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
        if (cells_[a] < 1) throw ValidationError("grid.cells must be positive");
        if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
            throw ValidationError("grid.lengths must be positive");
    }
    if (dim == 1) {
        cells_[1] = 0;
        lengths_[1] = 1.0;
    }

    const int nx = cells_[0];
    const int ny = cells_[1];
    node_count_ = static_cast<Index>(nx + 1) * (ny + 1);
    weights_.resize(node_count_);
    boundary_weights_.setZero(node_count_);

    const double hx = spacing(0);
    if (dim == 1) {
        for (int i = 0; i <= nx; ++i) weights_[i] = hx * end_factor(i, nx);
        boundary_weights_[0] = 1.0;
        boundary_weights_[nx] = 1.0;
        measure_ = lengths_[0];
        return;
    }

    const double hy = spacing(1);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const Index k = node(i, j);
            weights_[k] = hx * hy * end_factor(i, nx) * end_factor(j, ny);
            if (j == 0 || j == ny) boundary_weights_[k] += hx * end_factor(i, nx);
            if (i == 0 || i == nx) boundary_weights_[k] += hy * end_factor(j, ny);
        }
    }
    measure_ = lengths_[0] * lengths_[1];
}

std::shared_ptr<const Grid> Grid::line(int cells, double length) {
    return std::shared_ptr<const Grid>(new Grid(1, {cells, 0}, {length, 1.0}));
}

std::shared_ptr<const Grid> Grid::rectangle(int cells_x, int cells_y, double length_x,
                                            double length_y) {
    return std::shared_ptr<const Grid>(new Grid(2, {cells_x, cells_y}, {length_x, length_y}));
}

std::array<double, 2> Grid::coordinate(Index k) const {
    const Index stride = nodes_along(0);
    const Index i = k % stride;
    const Index j = k / stride;
    return {static_cast<double>(i) * spacing(0), dim_ == 2 ? static_cast<double>(j) * spacing(1) : 0.0};
}

bool Grid::same_layout(const Grid& other) const noexcept {
    return dim_ == other.dim_ && cells_ == other.cells_ && lengths_ == other.lengths_;
}

Field::Field(GridPtr g, Vector v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw ValidationError("Field: null grid");
    if (values.size() != grid->node_count())
        throw ValidationError("Field: value count " + std::to_string(values.size()) +
                              " does not match grid node count " +
                              std::to_string(grid->node_count()));
}

Field Field::constant(GridPtr g, double c) {
    const Index n = g->node_count();
    return Field(std::move(g), Vector::Constant(n, c));
}

Field Field::from_function(GridPtr g, const std::function<double(double, double)>& f) {
    Vector v(g->node_count());
    for (Index k = 0; k < v.size(); ++k) {
        const auto [x, y] = g->coordinate(k);
        v[k] = f(x, y);
    }
    return Field(std::move(g), std::move(v));
}

DiscreteOperator::DiscreteOperator(GridPtr grid, double gamma, SparseMatrix laplacian)
    : grid_(std::move(grid)), gamma_(gamma), laplacian_(std::move(laplacian)) {
    matrix_ = laplacian_;
    if (gamma_ > 0.0) {
        const Vector& bw = grid_->boundary_weights();
        for (Index k = 0; k < bw.size(); ++k)
            if (bw[k] > 0.0) matrix_.coeffRef(k, k) += gamma_ * bw[k];
    }
    matrix_.makeCompressed();
}

DiscreteOperator assemble_operator(GridPtr grid, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and >= 0");
    const Grid& g = *grid;
    std::vector<Eigen::Triplet<double>> triplets;
    auto add_edge = [&](Index a, Index b, double c) {
        triplets.emplace_back(a, a, c);
        triplets.emplace_back(b, b, c);
        triplets.emplace_back(a, b, -c);
        triplets.emplace_back(b, a, -c);
    };

    const int nx = g.cells(0);
    const double hx = g.spacing(0);
    if (g.dim() == 1) {
        for (int i = 0; i < nx; ++i) add_edge(i, i + 1, 1.0 / hx);
    } else {
        const int ny = g.cells(1);
        const double hy = g.spacing(1);
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i)
                add_edge(g.node(i, j), g.node(i + 1, j), hy * end_factor(j, ny) / hx);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i)
                add_edge(g.node(i, j), g.node(i, j + 1), hx * end_factor(i, nx) / hy);
    }

    const Index n = g.node_count();
    SparseMatrix a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return DiscreteOperator(std::move(grid), gamma, std::move(a));
}

double integrate(const Field& f) { return f.grid->weights().dot(f.values); }

double inner(const Field& f, const Field& g) {
    return f.grid->weights().dot(f.values.cwiseProduct(g.values));
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

Vector solve_symmetric(const SparseMatrix& matrix, const Vector& rhs, double tol) {
    if (rhs.norm() == 0.0) return Vector::Zero(rhs.size());
    Vector x;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(matrix);
    if (ldlt.info() == Eigen::Success && refine_solve(ldlt, matrix, rhs, tol, x)) return x;

    // Indefinite or badly pivoted: fall back to LU with partial pivoting.
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(matrix);
    lu.factorize(matrix);
    if (lu.info() == Eigen::Success && refine_solve(lu, matrix, rhs, tol, x)) return x;
    throw ConvergenceError("linear solve failed to reach relative residual " + std::to_string(tol));
}

Vector solve_shifted(const DiscreteOperator& op, const Vector& shift, const Vector& rhs, double tol) {
    const Index n = op.grid().node_count();
    if (shift.size() != n || rhs.size() != n)
        throw ValidationError("solve_shifted: size mismatch with grid");
    if ((shift.array() < 0.0).any()) throw DomainError("solve_shifted: shift must be >= 0");
    if (op.gamma() == 0.0 && (shift.array() == 0.0).all())
        throw SingularSystemError("solve_shifted: Neumann operator with zero shift is singular");

    SparseMatrix k = op.matrix();
    for (Index i = 0; i < n; ++i) k.coeffRef(i, i) += shift[i];
    return solve_symmetric(k, rhs, tol);
}

Vector solve_shifted(const DiscreteOperator& op, double shift, const Vector& rhs, double tol) {
    return solve_shifted(op, Vector::Constant(op.grid().node_count(), shift), rhs, tol);
}

Field solve_shifted(const DiscreteOperator& op, const Field& shift, const Field& rhs, double tol) {
    return Field(op.grid_ptr(), solve_shifted(op, shift.values, rhs.values, tol));
}

DualNorm dual_norm(const DiscreteOperator& a_gamma, const Field& u, double tol) {
    if (!(a_gamma.gamma() > 0.0)) throw DomainError("dual_norm: requires gamma > 0");
    const Vector rhs = u.grid->weights().cwiseProduct(u.values);
    Field zeta(a_gamma.grid_ptr(), solve_shifted(a_gamma, 0.0, rhs, tol));
    const double pairing = inner(u, zeta);
    return {std::sqrt(std::max(pairing, 0.0)), std::move(zeta)};
}

DualNorm dual_norm(const Field& u, double gamma, double tol) {
    if (!(gamma > 0.0)) throw DomainError("dual_norm: requires gamma > 0");
    return dual_norm(assemble_operator(u.grid, gamma), u, tol);
}

}  // namespace hydrostore
