#pragma once

#include "qlab/dnmap.hpp"
#include "qlab/forward.hpp"
#include "qlab/linops.hpp"

namespace qlab {

enum class GaugeFlavor { additive_source, scaling, magnetic };

/// A base/transformed pair of coefficient sets related by a gauge.
struct GaugePair {
    CoefficientSet base;
    CoefficientSet transformed;
    Field phi;
    GaugeFlavor flavor = GaugeFlavor::additive_source;
    /// scaling flavor: false when sigma/q is not constant, in which case
    /// the pair is NOT expected to share a DN map.
    bool obstruction_expected = true;
};

/// psi(x,y) * [x(1-x)y(1-y)]^2 : vanishing trace and continuum normal
/// derivative on the boundary; the discrete one-sided normal derivative
/// is O(h^2), not zero.
Field boundary_flat_bump(const GridSpec& g, const std::function<double(double, double)>& psi);

/// C^2 bump amp * (1-s^2)^3 (1-t^2)^3 with s=(x-cx)/hw, t=(y-cy)/hw,
/// identically zero outside the support square. With hw <= 0.3 all
/// discrete trace conditions hold to machine precision.
Field interior_bump(const GridSpec& g, double amp, double cx = 0.5, double cy = 0.5,
                    double hw = 0.3);

/// Discrete check of phi|bd = 0 (1e-12) and one-sided normal derivative
/// below max(1e-12, 100 h^2 max|phi|). Throws on violation.
void check_gauge_trace_conditions(const Field& phi);

/// Value of the quasilinear operator div((sigma+qu) grad u) in the same
/// expanded discretization the forward solver uses, on all nodes.
Field quasilinear_operator_value(const Field& sigma, const Field& q, const Field& u);

/// Linear (q = 0) additive-source pair: F_tilde = F + div(sigma grad phi).
GaugePair build_linear_counterexample(const Field& sigma, const Field& F, const Field& phi);

/// The transformed solution u + phi of an additive-source pair.
Field shifted_solution(const GaugePair& pair, const Field& u);

/// Scaling pair (sigma^2/q, sigma, sigma F / q); requires q nonvanishing.
GaugePair build_scaling_gauge(const CoefficientSet& set);

/// Nonlinear additive-source experiment: F_tilde is the operator value at
/// u0 + phi, so u0 + phi solves the transformed problem exactly and the
/// zeroth-order Cauchy data match by construction. Linearized DN orders
/// then separate the pair when q != 0.
struct GaugeBreakReport {
    DNComparison cmp;
    double transformed_residual = 0.0;  // residual of u0+phi under the transformed set
    double f_change = 0.0;              // max |F_tilde - F|
};

GaugeBreakReport gauge_break_experiment(const CoefficientSet& set, const Field& phi,
                                        const BoundaryBasis& basis, double eps,
                                        double tol = 1e-10);

/// Verifies the solution-set relations under a synthetic magnetic gauge
/// A_tilde = A - grad(phi), Q_tilde = Q:
///  - v_tilde = e^{i phi} v for Dirichlet solves with a shared trace,
///  - v0_tilde = e^{-i phi} v0 for the conjugated (adjoint) problems,
///  - the candidate V0_tilde = (Theta/Theta_tilde) e^{-i phi} V0 is
///    annihilated by the transformed adjoint operator.
struct SolutionRelationReport {
    double relation_v = 0.0;
    double relation_v0 = 0.0;
    double relation_V0_op = 0.0;
};

SolutionRelationReport verify_solution_relations(const CoefficientSet& set, const Field& u0,
                                                 const Field& theta_tilde, const Field& phi,
                                                 const std::vector<cplx>& trace_f,
                                                 double tol = 1e-10);

}  // namespace qlab
