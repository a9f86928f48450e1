#include "qlab/linops.hpp"

#include <cmath>
#include <random>

namespace qlab {

std::pair<EllipticProblem, EllipticProblem> build_linearized(const CoefficientSet& set,
                                                             const Field& u0) {
    const GridSpec& g = u0.grid;
    const Field theta = set.sigma + set.q * u0;
    for (int k = 0; k < g.node_count(); ++k) {
        if (!(theta[k].real() > 0.0))
            throw std::invalid_argument("build_linearized: ellipticity violated (sigma+qu0 <= 0)");
    }
    auto [gx, gy] = gradient(u0);
    const Field zero(g, 0.0, true);
    const std::vector<cplx> ztrace(g.boundary_count(), 0.0);

    EllipticProblem L = make_problem(theta, set.q * gx, set.q * gy, divergence_form(set.q, u0),
                                     zero, ztrace);
    L.maximum_principle = true;
    EllipticProblem Lstar = make_problem(theta, cplx(-1.0, 0.0) * (set.q * gx),
                                         cplx(-1.0, 0.0) * (set.q * gy), zero, zero, ztrace);
    Lstar.maximum_principle = true;
    return {L, Lstar};
}

MagneticData build_magnetic(const CoefficientSet& set, const Field& u0) {
    const GridSpec& g = u0.grid;
    MagneticData m;
    m.Theta = set.sigma + set.q * u0;
    for (int k = 0; k < g.node_count(); ++k) {
        if (!(m.Theta[k].real() > 0.0))
            throw std::invalid_argument("build_magnetic: Theta <= 0 somewhere");
    }

    auto [tx, ty] = gradient(m.Theta);
    auto [ux, uy] = gradient(u0);
    auto [qx, qy] = gradient(set.q);
    auto [sx, sy] = gradient(set.sigma);
    const Field lap_u = laplacian(u0);

    m.Xx = Field(g);
    m.Xy = Field(g);
    m.R = Field(g);
    m.Zx = Field(g);
    m.Zy = Field(g);
    for (int k = 0; k < g.node_count(); ++k) {
        const cplx th = m.Theta[k];
        m.Xx[k] = -(tx[k] + set.q[k] * ux[k]) / th;
        m.Xy[k] = -(ty[k] + set.q[k] * uy[k]) / th;
        m.R[k] = -(qx[k] * ux[k] + qy[k] * uy[k] + set.q[k] * lap_u[k]) / th;
        m.Zx[k] = -(sx[k] + u0[k] * qx[k]) / th;
        m.Zy[k] = -(sy[k] + u0[k] * qy[k]) / th;
    }
    const bool real_in = set.sigma.real_flag && set.q.real_flag && u0.real_flag;
    m.Xx.real_flag = m.Xy.real_flag = m.R.real_flag = real_in;
    m.Zx.real_flag = m.Zy.real_flag = real_in;
    m.Theta.real_flag = real_in;

    const cplx iu(0.0, 1.0);
    m.Ax = (iu * 0.5) * m.Xx;
    m.Ay = (iu * 0.5) * m.Xy;

    // Substitution route: Q = |X|^2/4 - div(X)/2 + R with the mesh
    // divergence applied to the X fields.
    const Field divX = divergence(m.Xx, m.Xy);
    m.Q = Field(g);
    for (int k = 0; k < g.node_count(); ++k) {
        m.Q[k] = 0.25 * (m.Xx[k] * m.Xx[k] + m.Xy[k] * m.Xy[k]) - 0.5 * divX[k] + m.R[k];
    }
    m.Q.real_flag = real_in;

    // Second route: the expanded closed form. Compared away from the
    // boundary strip, where the substitution route nests one-sided
    // stencils and drops below second order.
    const Field lap_theta = laplacian(m.Theta);
    double gap = 0.0, scale = 0.0;
    const double margin = 0.125;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double d = std::min(std::min(g.x(i), 1.0 - g.x(i)),
                                      std::min(g.y(j), 1.0 - g.y(j)));
            if (d < margin - 1e-14) continue;
            const int k = g.id(i, j);
            const cplx th = m.Theta[k];
            const cplx qc = set.q[k];
            const cplx closed = (lap_theta[k] - qc * lap_u[k]) / (2.0 * th) -
                                (qx[k] * ux[k] + qy[k] * uy[k]) / (2.0 * th) +
                                (qc * qc * (ux[k] * ux[k] + uy[k] * uy[k]) -
                                 (tx[k] * tx[k] + ty[k] * ty[k])) /
                                    (4.0 * th * th);
            gap = std::max(gap, std::abs(m.Q[k] - closed));
            scale = std::max(scale, std::abs(m.Q[k]));
        }
    }
    m.q_route_gap = gap / std::max(1.0, scale);
    return m;
}

Field random_smooth_field(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
        // uniform in [-1,1), platform-stable
        return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    };
    constexpr int kmax = 4;
    double cr[kmax][kmax], ci[kmax][kmax];
    for (int a = 0; a < kmax; ++a)
        for (int b = 0; b < kmax; ++b) {
            cr[a][b] = unit();
            ci[a][b] = unit();
        }
    Field f = make_field(g, [&](double x, double y) {
        cplx s = 0.0;
        for (int a = 0; a < kmax; ++a)
            for (int b = 0; b < kmax; ++b) {
                const double m = std::sin((a + 1) * M_PI * x) * std::sin((b + 1) * M_PI * y);
                s += cplx(cr[a][b], ci[a][b]) * m;
            }
        return s;
    });
    for (const auto& bn : boundary_cycle(g)) f[bn.id] = 0.0;
    return f;
}

namespace {

cplx inner(const Field& f, const Field& g) {
    Field prod(f.grid);
    for (size_t k = 0; k < f.v.size(); ++k) prod.v[k] = std::conj(f.v[k]) * g.v[k];
    return integrate(prod, Region::interior);
}

double l2norm(const Field& f) { return std::sqrt(std::abs(inner(f, f))); }

}  // namespace

double adjoint_pairing_gap(const EllipticProblem& L, const EllipticProblem& Lstar, int trials,
                           std::uint64_t seed) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Field f = random_smooth_field(L.a.grid, seed + 2 * t);
        const Field g = random_smooth_field(L.a.grid, seed + 2 * t + 1);
        const cplx lhs = inner(f, apply_elliptic(L, g));
        const cplx rhs = inner(apply_elliptic(Lstar, f), g);
        const double denom = l2norm(f) * l2norm(g);
        if (denom > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
    return worst;
}

TwoGridReport verify_adjoint_pairing(const EllipticProblem& L_coarse,
                                     const EllipticProblem& Ls_coarse,
                                     const EllipticProblem& L_fine,
                                     const EllipticProblem& Ls_fine, int trials,
                                     std::uint64_t seed) {
    TwoGridReport rep;
    rep.gap_coarse = adjoint_pairing_gap(L_coarse, Ls_coarse, trials, seed);
    rep.gap_fine = adjoint_pairing_gap(L_fine, Ls_fine, trials, seed);
    rep.ratio = rep.gap_fine > 0.0 ? rep.gap_coarse / rep.gap_fine : 0.0;
    rep.pass = (rep.gap_coarse <= 1e-12 && rep.gap_fine <= 1e-12) ||
               (rep.ratio >= 3.0 && rep.ratio <= 5.0);
    return rep;
}

Field apply_magnetic(const Field& Ax, const Field& Ay, const Field& Q, const Field& v,
                     const Field* divA_in) {
    const GridSpec& g = v.grid;
    const double h = g.h;
    const cplx iu(0.0, 1.0);
    const Field divA = divA_in ? *divA_in : divergence(Ax, Ay);
    Field out(g);
    for (int j = 1; j < g.n - 1; ++j) {
        for (int i = 1; i < g.n - 1; ++i) {
            const cplx lap = (v.at(i + 1, j) + v.at(i - 1, j) + v.at(i, j + 1) + v.at(i, j - 1) -
                              4.0 * v.at(i, j)) /
                             (h * h);
            const cplx vx = (v.at(i + 1, j) - v.at(i - 1, j)) / (2.0 * h);
            const cplx vy = (v.at(i, j + 1) - v.at(i, j - 1)) / (2.0 * h);
            const cplx a2 = Ax.at(i, j) * Ax.at(i, j) + Ay.at(i, j) * Ay.at(i, j);
            out.at(i, j) = -lap - 2.0 * iu * (Ax.at(i, j) * vx + Ay.at(i, j) * vy) +
                           (-iu * divA.at(i, j) + a2 + Q.at(i, j)) * v.at(i, j);
        }
    }
    return out;
}

EllipticProblem magnetic_problem(const Field& Ax, const Field& Ay, const Field& Q,
                                 const std::vector<cplx>& trace, const Field* divA_in) {
    const GridSpec& g = Ax.grid;
    const cplx iu(0.0, 1.0);
    Field a(g, cplx(-1.0, 0.0), true);
    a.real_flag = true;
    const Field divA = divA_in ? *divA_in : divergence(Ax, Ay);
    Field c(g);
    for (int k = 0; k < g.node_count(); ++k) {
        c[k] = -iu * divA[k] + Ax[k] * Ax[k] + Ay[k] * Ay[k] + Q[k];
    }
    const Field bx = cplx(-2.0, 0.0) * (iu * Ax);
    const Field by = cplx(-2.0, 0.0) * (iu * Ay);
    Field zero(g, 0.0, true);
    return make_problem(a, bx, by, c, zero, trace);
}

double gauge_conjugation_residual(const MagneticData& mag, const Field& phi, const Field& v) {
    const GridSpec& g = phi.grid;
    require_same_grid(phi, v, "gauge_conjugation_residual");
    for (int k = 0; k < g.node_count(); ++k) {
        if (std::abs(phi[k].real()) > 1e-13)
            throw std::invalid_argument("gauge_conjugation_residual: phi must be purely imaginary");
    }
    for (const auto& b : boundary_cycle(g)) {
        if (std::abs(phi[b.id]) > 1e-13)
            throw std::invalid_argument("gauge_conjugation_residual: phi must vanish on the boundary");
    }

    auto [px, py] = gradient(phi);
    const Field Ax2 = mag.Ax + px;
    const Field Ay2 = mag.Ay + py;
    // div(A + grad phi) = div A + lap phi, never differencing grad phi again
    const Field divA = divergence(mag.Ax, mag.Ay);
    const Field divA2 = divA + laplacian(phi);

    const cplx iu(0.0, 1.0);
    Field emphi_v(g);
    for (int k = 0; k < g.node_count(); ++k) emphi_v[k] = std::exp(-iu * phi[k]) * v[k];

    const Field lhs = apply_magnetic(Ax2, Ay2, mag.Q, emphi_v, &divA2);
    const Field rhs_op = apply_magnetic(mag.Ax, mag.Ay, mag.Q, v, &divA);
    double worst = 0.0;
    for (int j = 1; j < g.n - 1; ++j) {
        for (int i = 1; i < g.n - 1; ++i) {
            const cplx r = lhs.at(i, j) - std::exp(-iu * phi.at(i, j)) * rhs_op.at(i, j);
            worst = std::max(worst, std::abs(r));
        }
    }
    const double vn = max_abs(v);
    return vn > 0.0 ? worst / vn : worst;
}

}  // namespace qlab
