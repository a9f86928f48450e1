#pragma once

#include <Eigen/Sparse>
#include <stdexcept>

#include "qlab/grid.hpp"

namespace qlab {

/// Scalar Dirichlet problem  div(a grad v) + b.grad v + c v = g  on the
/// unit square, v = dirichlet_trace on the boundary cycle.
/// "maximum-principle" instances are real with min a >= c0 > 0 and
/// c <= 0 pointwise.
struct EllipticProblem {
    Field a;
    Field bx, by;
    Field c;
    Field rhs;
    std::vector<cplx> dirichlet_trace;
    bool maximum_principle = false;
};

EllipticProblem make_problem(const Field& a, const Field& bx, const Field& by, const Field& c,
                             const Field& rhs, const std::vector<cplx>& trace);

/// Zero-drift, zero-order problem div(a grad v) = g.
EllipticProblem make_divergence_problem(const Field& a, const Field& rhs,
                                        const std::vector<cplx>& trace);

/// Sparse system over interior unknowns, Dirichlet values eliminated
/// into the right-hand side. row_of_node maps node id -> interior row
/// (-1 on boundary nodes).
struct LinearSystem {
    Eigen::SparseMatrix<cplx> A;
    Eigen::VectorXcd b;
    std::vector<int> interior_ids;
    std::vector<int> row_of_node;
};

LinearSystem assemble(const EllipticProblem& p);

class solve_error : public std::runtime_error {
  public:
    solve_error(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_residual(achieved) {}
    double achieved_residual;
};

/// Direct sparse LU solve. The backward error ||Ax-b|| / (||A|| ||x|| + ||b||)
/// must come out <= tol or a solve_error carrying it is thrown.
Field solve_dirichlet(const EllipticProblem& p, double tol = 1e-10);

/// Applies the operator div(a grad .) + b.grad + c to a field on
/// interior nodes (boundary entries of the result are zero).
Field apply_elliptic(const EllipticProblem& p, const Field& f);

/// Formal adjoint triple (a, -b, c - div b) with the same rhs/trace slots empty.
EllipticProblem formal_adjoint(const EllipticProblem& p);

}  // namespace qlab
