#include "qlab/recon.hpp"

#include <cmath>

namespace qlab {

BoundaryDeterminationReport boundary_sigma_determination(
    const CoefficientSet& A, const CoefficientSet& B, const std::vector<cplx>& f0,
    const std::vector<cplx>& probe_mode, double eps, double delta, double tol) {
    const GridSpec& g = A.sigma.grid;
    require_same_grid(A.sigma, B.sigma, "boundary_sigma_determination");

    const ForwardSolution base = solve_quasilinear(A, f0, nullptr, tol);
    std::vector<cplx> f_check(f0.size());
    for (size_t k = 0; k < f0.size(); ++k) f_check[k] = f0[k] + eps * probe_mode[k];
    const ForwardSolution check = solve_quasilinear(A, f_check, &base.u0, tol);

    const MagneticData magA = build_magnetic(A, base.u0);
    const MagneticData magC = build_magnetic(A, check.u0);

    const Field sig_hat = A.sigma - B.sigma;
    auto [shx, shy] = gradient(sig_hat);

    BoundaryDeterminationReport rep;
    rep.delta = delta;
    for (const auto& b : boundary_cycle(g)) {
        if (b.corner) continue;
        const int id = b.id;
        const double m = std::hypot(std::abs(magA.Ax[id] - magC.Ax[id]),
                                    std::abs(magA.Ay[id] - magC.Ay[id]));
        rep.node_ids.push_back(id);
        rep.margin.push_back(m);
        const bool det = m > delta;
        rep.determinate.push_back(det);
        rep.recovered_sigma_hat.push_back(det ? 0.0 : std::nan(""));
        rep.true_sigma_hat.push_back(sig_hat[id].real());
        rep.true_grad_norm.push_back(std::hypot(std::abs(shx[id]), std::abs(shy[id])));
        if (det) {
            ++rep.determinate_count;
            rep.max_inconsistency = std::max(rep.max_inconsistency, std::abs(sig_hat[id].real()));
        }
    }
    return rep;
}

BRecoveryReport verify_B_recovery(const Field& q, const std::vector<cplx>* trace, double tol) {
    const GridSpec& g = q.grid;
    BRecoveryReport rep;
    double qmin = 1e300;
    for (int k = 0; k < g.node_count(); ++k) qmin = std::min(qmin, q[k].real());
    rep.positive_q = qmin > 0.0;

    std::vector<cplx> tr(g.boundary_count(), 1.0);
    if (trace) tr = *trace;
    Field zero(g, 0.0, true);
    const Field B = solve_dirichlet(make_divergence_problem(q, zero, tr), tol);
    Field one(g, 1.0, true);
    rep.deviation_from_one = max_abs(B - one);
    return rep;
}

ARecoveryReport verify_A_recovery(const CoefficientSet& set, const Field& u0,
                                  const std::vector<int>& x0_nodes, double tau,
                                  std::array<double, 2> d, const Field* phi_candidate,
                                  double tol) {
    const GridSpec& g = u0.grid;
    const ComplexFrequency freq = make_frequency(d, tau);
    const MagneticData mag = build_magnetic(set, u0);
    const Field phase = solve_transport(mag, freq);
    const CGOSolution sol = build_cgo(set, u0, freq, phase, tol);
    const Field dqv = divergence_form(set.q, sol.V0);
    auto [qx, qy] = gradient(set.q);
    const cplx zh1 = freq.zeta[0] / tau;
    const cplx zh2 = freq.zeta[1] / tau;
    const cplx iu(0.0, 1.0);

    ARecoveryReport rep;
    rep.tau = tau;
    for (int id : x0_nodes) {
        ARecoveryPoint pt;
        pt.node_id = id;
        pt.x = g.x(g.ix(id));
        pt.y = g.y(g.jy(id));
        const double dist = std::min(std::min(pt.x, 1.0 - pt.x), std::min(pt.y, 1.0 - pt.y));
        if (dist < 0.25 - 1e-12) {
            throw std::invalid_argument("verify_A_recovery: probe point too close to the boundary");
        }
        pt.probe = dqv[id];
        pt.limit = (set.q[id] * mag.Zx[id] + qx[id]) * zh1 + (set.q[id] * mag.Zy[id] + qy[id]) * zh2;
        const cplx zx = freq.zeta[0] * pt.x + freq.zeta[1] * pt.y;
        const double envelope = std::abs(std::exp(zx + sol.phase[id]));
        pt.threshold = 0.5 * tau * std::abs(pt.limit) * envelope;
        pt.certified = std::abs(pt.limit) > 1e-8 && std::abs(pt.probe) >= pt.threshold;
        if (phi_candidate) {
            pt.gauge_residual = std::exp(2.0 * iu * (*phi_candidate)[id]) - 1.0;
        }
        if (pt.certified) ++rep.certified_count;
        rep.points.push_back(pt);
    }
    return rep;
}

SystemResidual system_residual(const CoefficientSet& A, const Field& u0,
                               const CoefficientSet& B, const Field& u0_tilde) {
    const GridSpec& g = u0.grid;
    const MagneticData magA = build_magnetic(A, u0);
    const MagneticData magB = build_magnetic(B, u0_tilde);

    SystemResidual out;
    const cplx m2i(0.0, -2.0);
    out.r1 = m2i * divergence(magA.Ax - magB.Ax, magA.Ay - magB.Ay);
    out.r2 = magA.Q - magB.Q;

    out.M11 = Field(g);
    out.M12 = Field(g);
    out.M21 = Field(g);
    out.M22 = Field(g);
    out.detM = Field(g);
    double gap = 0.0;
    for (int k = 0; k < g.node_count(); ++k) {
        const cplx th = magA.Theta[k];
        const cplx q = A.q[k];
        out.M11[k] = 1.0 / th;
        out.M12[k] = q / th;
        out.M21[k] = 1.0 / (2.0 * th);
        out.M22[k] = -q / (2.0 * th);
        out.detM[k] = out.M11[k] * out.M22[k] - out.M12[k] * out.M21[k];
        gap = std::max(gap, std::abs(out.detM[k] + q / (th * th)));
    }
    out.detM_identity_gap = gap;
    out.r1_norm = max_abs(out.r1);
    out.r2_norm = max_abs(out.r2);
    return out;
}

UniquenessRow uniqueness_experiment(const std::string& name, const CoefficientSet& A,
                                    const CoefficientSet& B, const std::vector<cplx>& f0,
                                    const BoundaryBasis& basis, double eps, double tol) {
    UniquenessRow row;
    row.name = name;
    row.cmp = compare_dn(A, B, f0, basis, eps, tol);

    const double m[3] = {row.cmp.margin0, row.cmp.margin1, row.cmp.margin2};
    const double fl[3] = {row.cmp.floor.order0, row.cmp.floor.order1, row.cmp.floor.order2};
    bool all_below = true;
    for (int k = 0; k < 3; ++k) all_below = all_below && m[k] <= fl[k];
    int disc = -1;
    for (int k = 0; k < 3 && disc < 0; ++k)
        if (m[k] >= 10.0 * fl[k]) disc = k;

    if (all_below) {
        row.verdict = "indistinguishable";
    } else if (disc >= 0) {
        row.verdict = "discriminated";
        row.discriminating_order = disc;
        row.discriminating_mode = disc == 1 ? row.cmp.worst_mode1 : -1;
    } else {
        row.verdict = "inconclusive";
    }
    return row;
}

}  // namespace qlab
