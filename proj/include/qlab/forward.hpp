#pragma once

#include "qlab/elliptic.hpp"
#include "qlab/grid.hpp"

namespace qlab {

/// One instance (sigma, q, F, f0) of the quasilinear problem
/// div((sigma + q u) grad u) = F, u = f0 on the boundary.
struct CoefficientSet {
    Field sigma;
    Field q;
    Field F;
    std::vector<cplx> f0;
};

struct ConditionReport {
    double ellipticity_margin = 0.0;  // min(sigma + q u0)
    double sign_max = 0.0;            // max div(q grad u0)
    double nondegeneracy_margin = 0.0;  // min |q|
    double structural_margin = 0.0;     // min |grad(sigma/q)|
    double sign_slack = 0.0;            // 10 h^2
    bool ellipticity_ok = false;
    bool sign_ok = false;
    bool nondegeneracy_ok = false;
    bool structural_ok = false;
};

struct ForwardSolution {
    Field u0;
    int newton_iters = 0;
    double final_residual = 0.0;
    std::vector<double> residual_history;
    // Coefficients of the linearized operator L frozen at u0:
    // (a, b, c) = (sigma + q u0, q grad u0, div(q grad u0)).
    Field lin_a, lin_bx, lin_by, lin_c;
};

class forward_error : public std::runtime_error {
  public:
    forward_error(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Nonlinear residual (sigma+qu) lap u + grad(sigma+qu).grad u - F on
/// interior nodes (boundary entries zero). Quadratic in u, so the exact
/// discrete Jacobian below is its derivative with no remainder.
Field quasilinear_residual(const CoefficientSet& set, const Field& u);

/// Sparse system J(u) v = rhs with Dirichlet data `trace` eliminated.
/// J is the exact derivative of quasilinear_residual, i.e. the
/// linearized operator L frozen at u.
LinearSystem jacobian_system(const CoefficientSet& set, const Field& u, const Field& rhs_field,
                             const std::vector<cplx>& trace);

/// Solves the linearized problem J(u) v = rhs, v = trace on the boundary.
Field solve_jacobian(const CoefficientSet& set, const Field& u, const Field& rhs_field,
                     const std::vector<cplx>& trace, double tol = 1e-10);

/// Applies J(u) to a field on interior nodes.
Field apply_jacobian(const CoefficientSet& set, const Field& u, const Field& v);

/// Damped Newton iteration for the quasilinear Dirichlet problem.
/// Default guess: linear solve with coefficient sigma. Stops when the
/// interior max-norm residual is <= tol.
ForwardSolution solve_quasilinear(const CoefficientSet& set, const std::vector<cplx>& f,
                                  const Field* guess = nullptr, double tol = 1e-10,
                                  int max_iter = 50);

/// The construction around the well-posedness theorem with sigma = q = 1:
/// w = x(1-x) + y(1-y), F = -4, u0 = -1 + sqrt(1+2w).
std::pair<CoefficientSet, Field> manufactured_solution(const GridSpec& g);

ConditionReport check_conditions(const CoefficientSet& set, const Field& u0);

}  // namespace qlab
