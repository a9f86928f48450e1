#include "qlab/gauge.hpp"

#include <cmath>

namespace qlab {

Field boundary_flat_bump(const GridSpec& g, const std::function<double(double, double)>& psi) {
    return make_real_field(g, [&](double x, double y) {
        const double beta = x * (1.0 - x) * y * (1.0 - y);
        return psi(x, y) * beta * beta;
    });
}

Field interior_bump(const GridSpec& g, double amp, double cx, double cy, double hw) {
    auto b = [](double t) {
        const double u = 1.0 - t * t;
        return u > 0.0 ? u * u * u : 0.0;
    };
    return make_real_field(g, [&](double x, double y) {
        return amp * b((x - cx) / hw) * b((y - cy) / hw);
    });
}

void check_gauge_trace_conditions(const Field& phi) {
    const GridSpec& g = phi.grid;
    const double nd_tol = std::max(1e-12, 100.0 * g.h * g.h * max_abs(phi));
    for (const auto& b : boundary_cycle(g)) {
        if (std::abs(phi[b.id]) > 1e-12) {
            throw std::invalid_argument("gauge: phi does not vanish on the boundary");
        }
        if (std::abs(normal_derivative_at(phi, b.id)) > nd_tol) {
            throw std::invalid_argument(
                "gauge: discrete normal derivative of phi exceeds the boundary-flat tolerance");
        }
    }
}

Field quasilinear_operator_value(const Field& sigma, const Field& q, const Field& u) {
    const Field w = sigma + q * u;
    const Field lap_u = laplacian(u);
    auto [gwx, gwy] = gradient(w);
    auto [gux, guy] = gradient(u);
    return w * lap_u + gwx * gux + gwy * guy;
}

GaugePair build_linear_counterexample(const Field& sigma, const Field& F, const Field& phi) {
    require_same_grid(sigma, F, "build_linear_counterexample");
    require_same_grid(sigma, phi, "build_linear_counterexample");
    check_gauge_trace_conditions(phi);
    const GridSpec& g = sigma.grid;
    const Field zero_q(g, 0.0, true);
    const std::vector<cplx> f0(g.boundary_count(), 0.0);

    GaugePair pair;
    pair.flavor = GaugeFlavor::additive_source;
    pair.phi = phi;
    pair.base = CoefficientSet{sigma, zero_q, F, f0};
    // Same expanded discretization as the forward residual, so u + phi is
    // an exact discrete solution of the transformed problem.
    pair.transformed = CoefficientSet{sigma, zero_q, F + quasilinear_operator_value(sigma, zero_q, phi), f0};
    return pair;
}

Field shifted_solution(const GaugePair& pair, const Field& u) {
    if (pair.flavor != GaugeFlavor::additive_source) {
        throw std::invalid_argument("shifted_solution: pair is not an additive-source gauge");
    }
    return u + pair.phi;
}

GaugePair build_scaling_gauge(const CoefficientSet& set) {
    const GridSpec& g = set.sigma.grid;
    GaugePair pair;
    pair.flavor = GaugeFlavor::scaling;
    pair.base = set;
    pair.phi = Field(g, 0.0, true);

    Field s2q(g, 0.0, true), sFq(g, 0.0, true);
    double ratio_min = 1e300, ratio_max = -1e300;
    for (int k = 0; k < g.node_count(); ++k) {
        const double qv = set.q[k].real();
        if (std::abs(qv) < 1e-14) {
            throw std::invalid_argument("build_scaling_gauge: q vanishes");
        }
        s2q[k] = set.sigma[k] * set.sigma[k] / set.q[k];
        sFq[k] = set.sigma[k] * set.F[k] / set.q[k];
        const double r = set.sigma[k].real() / qv;
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
    }
    pair.obstruction_expected = (ratio_max - ratio_min) <= 1e-12 * std::max(1.0, std::abs(ratio_max));

    pair.transformed.sigma = s2q;
    pair.transformed.q = set.sigma;
    pair.transformed.F = sFq;
    pair.transformed.f0 = set.f0;
    return pair;
}

GaugeBreakReport gauge_break_experiment(const CoefficientSet& set, const Field& phi,
                                        const BoundaryBasis& basis, double eps, double tol) {
    check_gauge_trace_conditions(phi);
    const ForwardSolution base = solve_quasilinear(set, set.f0, nullptr, tol);
    const Field u_shifted = base.u0 + phi;

    CoefficientSet transformed = set;
    transformed.F = quasilinear_operator_value(set.sigma, set.q, u_shifted);

    GaugeBreakReport rep;
    rep.transformed_residual = max_abs_interior(quasilinear_residual(transformed, u_shifted));
    // interior change only: the solver never reads F on the boundary
    rep.f_change = max_abs_interior(transformed.F - set.F);
    rep.cmp = compare_dn(set, transformed, set.f0, basis, eps, tol);
    return rep;
}

SolutionRelationReport verify_solution_relations(const CoefficientSet& set, const Field& u0,
                                                 const Field& theta_tilde, const Field& phi,
                                                 const std::vector<cplx>& trace_f, double tol) {
    const GridSpec& g = u0.grid;
    require_same_grid(u0, phi, "verify_solution_relations");
    for (int k = 0; k < g.node_count(); ++k) {
        if (std::abs(phi[k].real()) > 1e-13)
            throw std::invalid_argument("verify_solution_relations: phi must be purely imaginary");
    }
    for (const auto& b : boundary_cycle(g)) {
        if (std::abs(phi[b.id]) > 1e-13)
            throw std::invalid_argument("verify_solution_relations: phi must vanish on the boundary");
    }

    const MagneticData mag = build_magnetic(set, u0);
    auto [px, py] = gradient(phi);
    const Field Axt = mag.Ax - px;
    const Field Ayt = mag.Ay - py;
    // div(A - grad phi) = div A - lap phi (no nested first differences)
    const Field divA = divergence(mag.Ax, mag.Ay);
    const Field divAt = divA - laplacian(phi);
    const cplx iu(0.0, 1.0);

    SolutionRelationReport rep;

    // v_tilde = e^{i phi} v.
    {
        const Field v =
            solve_dirichlet(magnetic_problem(mag.Ax, mag.Ay, mag.Q, trace_f, &divA), tol);
        const Field vt =
            solve_dirichlet(magnetic_problem(Axt, Ayt, mag.Q, trace_f, &divAt), tol);
        Field expected(g);
        for (int k = 0; k < g.node_count(); ++k) expected[k] = std::exp(iu * phi[k]) * v[k];
        rep.relation_v = max_abs(vt - expected) / std::max(max_abs(v), 1e-300);
    }

    // Adjoint side: conjugated coefficients, v0_tilde = e^{-i phi} v0.
    Field cAx(g), cAy(g), cAxt(g), cAyt(g), cQ(g), cdivA(g), cdivAt(g);
    for (int k = 0; k < g.node_count(); ++k) {
        cAx[k] = std::conj(mag.Ax[k]);
        cAy[k] = std::conj(mag.Ay[k]);
        cAxt[k] = std::conj(Axt[k]);
        cAyt[k] = std::conj(Ayt[k]);
        cQ[k] = std::conj(mag.Q[k]);
        cdivA[k] = std::conj(divA[k]);
        cdivAt[k] = std::conj(divAt[k]);
    }
    const Field v0 = solve_dirichlet(magnetic_problem(cAx, cAy, cQ, trace_f, &cdivA), tol);
    {
        const Field v0t =
            solve_dirichlet(magnetic_problem(cAxt, cAyt, cQ, trace_f, &cdivAt), tol);
        Field expected(g);
        for (int k = 0; k < g.node_count(); ++k) expected[k] = std::exp(-iu * phi[k]) * v0[k];
        rep.relation_v0 = max_abs(v0t - expected) / std::max(max_abs(v0), 1e-300);
    }

    // V0_tilde = (Theta/Theta_tilde) e^{-i phi} V0 must be annihilated by
    // the transformed adjoint operator -L*_{At,Qt}(Theta_tilde .).
    {
        Field V0(g), V0t(g), prod(g);
        for (int k = 0; k < g.node_count(); ++k) {
            V0[k] = v0[k] / mag.Theta[k];
            V0t[k] = (mag.Theta[k] / theta_tilde[k]) * std::exp(-iu * phi[k]) * V0[k];
            prod[k] = theta_tilde[k] * V0t[k];
        }
        const Field r = apply_magnetic(cAxt, cAyt, cQ, prod, &cdivAt);
        // Interior scale of the operator on this field.
        const double scale = max_abs(prod) / (g.h * g.h) + 1e-300;
        rep.relation_V0_op = max_abs_interior(r) / scale;
    }
    return rep;
}

}  // namespace qlab
