#pragma once

#include <array>
#include <functional>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace hydrostore {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Vertex-centred structured mesh on the interval (0, Lx) or the rectangle
/// (0, Lx) x (0, Ly).
///
/// Nodes are numbered lexicographically with the x index running fastest:
/// node(i, j) = i + (cells_x + 1) * j. Quadrature weights are the trapezoid
/// (lumped mass) weights; every discrete integral in the library uses them.
class Grid {
public:
    static std::shared_ptr<const Grid> line(int cells, double length);
    static std::shared_ptr<const Grid> rectangle(int cells_x, int cells_y, double length_x,
                                                 double length_y);

    int dim() const noexcept { return dim_; }
    int cells(int axis) const { return cells_.at(static_cast<std::size_t>(axis)); }
    double length(int axis) const { return lengths_.at(static_cast<std::size_t>(axis)); }
    double spacing(int axis) const { return length(axis) / cells(axis); }
    int nodes_along(int axis) const { return cells(axis) + 1; }
    Index node_count() const noexcept { return node_count_; }

    Index node(int i, int j = 0) const { return i + static_cast<Index>(nodes_along(0)) * j; }
    /// Coordinates of a node; y is 0 on a 1D grid.
    std::array<double, 2> coordinate(Index k) const;

    const Vector& weights() const noexcept { return weights_; }
    /// Lumped boundary measure per node (1 at each end point in 1D).
    const Vector& boundary_weights() const noexcept { return boundary_weights_; }
    double measure() const noexcept { return measure_; }

    bool same_layout(const Grid& other) const noexcept;

private:
    Grid(int dim, std::array<int, 2> cells, std::array<double, 2> lengths);

    int dim_;
    std::array<int, 2> cells_;
    std::array<double, 2> lengths_;
    Index node_count_;
    Vector weights_;
    Vector boundary_weights_;
    double measure_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Scalar grid function.
struct Field {
    GridPtr grid;
    Vector values;

    Field() = default;
    Field(GridPtr g, Vector v);

    static Field constant(GridPtr g, double c);
    static Field from_function(GridPtr g, const std::function<double(double, double)>& f);

    Index size() const noexcept { return values.size(); }
    double operator[](Index k) const { return values[k]; }
    double& operator[](Index k) { return values[k]; }
    double min() const { return values.minCoeff(); }
    double max() const { return values.maxCoeff(); }
    bool all_finite() const { return values.allFinite(); }
};

/// Stiffness matrix of <A_gamma v, w> = int grad v . grad w + gamma int_Gamma v w.
///
/// `laplacian` is the Neumann part (gamma = 0); `matrix` adds the lumped Robin
/// boundary mass. Both are symmetric Z-matrices with nonnegative row sums.
class DiscreteOperator {
public:
    DiscreteOperator(GridPtr grid, double gamma, SparseMatrix laplacian);

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    double gamma() const noexcept { return gamma_; }
    const SparseMatrix& laplacian() const noexcept { return laplacian_; }
    const SparseMatrix& matrix() const noexcept { return matrix_; }

    Vector apply(const Vector& v) const { return matrix_ * v; }
    /// <A_gamma v, w>.
    double form(const Vector& v, const Vector& w) const { return v.dot(matrix_ * w); }

private:
    GridPtr grid_;
    double gamma_;
    SparseMatrix laplacian_;
    SparseMatrix matrix_;
};

DiscreteOperator assemble_operator(GridPtr grid, double gamma);

/// Trapezoid quadrature of f over the domain.
double integrate(const Field& f);
/// Weighted inner product sum_k w_k f_k g_k.
double inner(const Field& f, const Field& g);
/// Discrete L2 norm sqrt(inner(f, f)).
double l2_norm(const Field& f);

/// Solves (diag(shift) + A_gamma) v = rhs with a sparse LDL^T factorisation,
/// checks ||residual|| <= tol ||rhs|| (refining once or twice if needed).
/// Throws SingularSystemError when gamma = 0 and shift vanishes identically.
Vector solve_shifted(const DiscreteOperator& op, const Vector& shift, const Vector& rhs,
                     double tol = 1e-10);
Vector solve_shifted(const DiscreteOperator& op, double shift, const Vector& rhs,
                     double tol = 1e-10);
Field solve_shifted(const DiscreteOperator& op, const Field& shift, const Field& rhs,
                    double tol = 1e-10);

/// Direct solve of a general symmetric sparse system (used for Newton Jacobians).
Vector solve_symmetric(const SparseMatrix& matrix, const Vector& rhs, double tol);

struct DualNorm {
    double value = 0.0;  ///< sqrt(<u, zeta>)
    Field zeta;          ///< solution of A_gamma zeta = u
};

/// V' norm of u induced by A_gamma; requires gamma > 0.
DualNorm dual_norm(const DiscreteOperator& a_gamma, const Field& u, double tol = 1e-10);
DualNorm dual_norm(const Field& u, double gamma, double tol = 1e-10);

}  // namespace hydrostore
