#include "qlab/cgo.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace qlab {

ComplexFrequency make_frequency(std::array<double, 2> d, double tau) {
    const double norm = std::hypot(d[0], d[1]);
    if (norm < 1e-14) throw std::invalid_argument("make_frequency: zero direction");
    if (tau < 0.0) throw std::invalid_argument("make_frequency: tau must be >= 0");
    ComplexFrequency f;
    f.d = {d[0] / norm, d[1] / norm};
    f.d_perp = {-f.d[1], f.d[0]};  // rotate by +90 degrees
    f.tau = tau;
    const double s = tau / std::sqrt(2.0);
    f.zeta = {cplx(s * f.d[0], s * f.d_perp[0]), cplx(s * f.d[1], s * f.d_perp[1])};
    return f;
}

namespace {

// Quintic C^2 ramp: 0 at t<=0, 1 at t>=1.
double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Cutoff equal to 1 on [0,1], C^2 decay to 0 on the 0.1-margins of the
// 1.2-dilation.
double cutoff1d(double t) {
    if (t < 0.0) return smoothstep(1.0 + t / 0.1);
    if (t > 1.0) return smoothstep(1.0 - (t - 1.0) / 0.1);
    return 1.0;
}

// One-sided Taylor data (value, first, second derivative) at the edge of
// a length-n sample row, from the side `left` (index 0) or right (n-1).
struct EdgeJet {
    cplx f, df, d2f;
};

EdgeJet edge_jet(const std::vector<cplx>& row, bool left, double h) {
    const int n = static_cast<int>(row.size());
    EdgeJet j;
    if (left) {
        j.f = row[0];
        j.df = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h);
        j.d2f = (2.0 * row[0] - 5.0 * row[1] + 4.0 * row[2] - row[3]) / (h * h);
    } else {
        j.f = row[n - 1];
        j.df = (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h);
        j.d2f = (2.0 * row[n - 1] - 5.0 * row[n - 2] + 4.0 * row[n - 3] - row[n - 4]) / (h * h);
    }
    return j;
}

cplx taylor(const EdgeJet& j, double s) { return j.f + s * j.df + 0.5 * s * s * j.d2f; }

}  // namespace

Field solve_transport(const MagneticData& mag, const ComplexFrequency& freq) {
    const GridSpec& g = mag.Theta.grid;
    const int n = g.n;
    if (n % 2 == 0) {
        throw std::invalid_argument("solve_transport: n_per_side must be odd (box alignment)");
    }
    const double h = g.h;
    const int M = 2 * (n - 1);   // doubled periodic box [-0.5,1.5)^2, spacing h
    const int m0 = (n - 1) / 2;  // box index of x=0

    // rhs g = (d + i d_perp) . Z / 2 on the grid.
    const cplx ex(freq.d[0], freq.d_perp[0]);
    const cplx ey(freq.d[1], freq.d_perp[1]);
    Field rhs(g);
    for (int k = 0; k < g.node_count(); ++k) {
        rhs[k] = 0.5 * (ex * mag.Zx[k] + ey * mag.Zy[k]);
    }

    // Quadratic-Taylor extension past the square (C^2 across the edges),
    // x first, then y, then the dilation cutoff.
    std::vector<cplx> ext(static_cast<size_t>(M) * M, 0.0);
    auto box = [&](int a, int b) -> cplx& { return ext[static_cast<size_t>(b) * M + a]; };

    for (int j = 0; j < n; ++j) {
        std::vector<cplx> row(n);
        for (int i = 0; i < n; ++i) row[i] = rhs.at(i, j);
        const EdgeJet jl = edge_jet(row, true, h);
        const EdgeJet jr = edge_jet(row, false, h);
        for (int a = 0; a < M; ++a) {
            const double x = -0.5 + a * h;
            cplx val;
            if (a < m0) {
                val = taylor(jl, x);
            } else if (a >= m0 + n) {
                val = taylor(jr, x - 1.0);
            } else {
                val = row[a - m0];
            }
            box(a, j + m0) = val;
        }
    }
    for (int a = 0; a < M; ++a) {
        std::vector<cplx> col(n);
        for (int j = 0; j < n; ++j) col[j] = box(a, j + m0);
        const EdgeJet jb = edge_jet(col, true, h);
        const EdgeJet jt = edge_jet(col, false, h);
        for (int b = 0; b < M; ++b) {
            const double y = -0.5 + b * h;
            if (b < m0) {
                box(a, b) = taylor(jb, y);
            } else if (b >= m0 + n) {
                box(a, b) = taylor(jt, y - 1.0);
            }
        }
    }
    for (int b = 0; b < M; ++b) {
        const double y = -0.5 + b * h;
        for (int a = 0; a < M; ++a) {
            const double x = -0.5 + a * h;
            box(a, b) *= cutoff1d(x) * cutoff1d(y);
            if (!std::isfinite(box(a, b).real()) || !std::isfinite(box(a, b).imag())) {
                throw std::runtime_error("solve_transport: non-finite extended rhs");
            }
        }
    }

    // Spectral inversion of (d_d + i d_perp) on the box; symbol
    // s(k) = i k.d - k.d_perp, zero mode dropped and handled analytically.
    static std::mutex fftw_mutex;
    std::vector<cplx> spec(ext.size());
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_plan fwd = fftw_plan_dft_2d(M, M, reinterpret_cast<fftw_complex*>(ext.data()),
                                         reinterpret_cast<fftw_complex*>(spec.data()),
                                         FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(fwd);
        fftw_destroy_plan(fwd);
    }

    const double L = 2.0;
    const double k1 = 2.0 * M_PI / L;
    cplx mean = spec[0] / double(M * M);
    for (int b = 0; b < M; ++b) {
        const int mb = b <= M / 2 ? b : b - M;
        for (int a = 0; a < M; ++a) {
            const int ma = a <= M / 2 ? a : a - M;
            const size_t idx = static_cast<size_t>(b) * M + a;
            if (ma == 0 && mb == 0) {
                spec[idx] = 0.0;
                continue;
            }
            const double kx = k1 * ma, ky = k1 * mb;
            const double kd = kx * freq.d[0] + ky * freq.d[1];
            const double kp = kx * freq.d_perp[0] + ky * freq.d_perp[1];
            const cplx symbol(-kp, kd);  // i(k.d) - (k.d_perp)
            spec[idx] /= symbol * double(M * M);
        }
    }

    std::vector<cplx> phi_box(spec.size());
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_plan bwd = fftw_plan_dft_2d(M, M, reinterpret_cast<fftw_complex*>(spec.data()),
                                         reinterpret_cast<fftw_complex*>(phi_box.data()),
                                         FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(bwd);
        fftw_destroy_plan(bwd);
    }

    Field phi(g);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const cplx periodic = phi_box[static_cast<size_t>(j + m0) * M + (i + m0)];
            // particular solution of (d_d + i d_perp) phi = mean
            phi.at(i, j) = periodic + mean * (freq.d[0] * g.x(i) + freq.d[1] * g.y(j));
        }
    }
    return phi;
}

double transport_residual(const MagneticData& mag, const ComplexFrequency& freq,
                          const Field& phase) {
    const GridSpec& g = phase.grid;
    auto [px, py] = gradient(phase);
    double worst = 0.0;
    for (int k = 0; k < g.node_count(); ++k) {
        const cplx r = freq.zeta[0] * (px[k] - 0.5 * mag.Zx[k]) +
                       freq.zeta[1] * (py[k] - 0.5 * mag.Zy[k]);
        worst = std::max(worst, std::abs(r));
    }
    return freq.tau > 0.0 ? worst / freq.tau : worst;
}

CGOSolution build_cgo(const CoefficientSet& set, const Field& u0, const ComplexFrequency& freq,
                      const Field& phase, double tol) {
    const GridSpec& g = u0.grid;
    if (freq.tau * g.h > 1.5) {
        throw std::invalid_argument("build_cgo: tau*h > 1.5, grid does not resolve the oscillation");
    }
    auto [L, Lstar] = build_linearized(set, u0);

    Field ansatz(g);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const cplx zx = freq.zeta[0] * g.x(i) + freq.zeta[1] * g.y(j);
            ansatz.at(i, j) = std::exp(zx + phase.at(i, j));
        }
    }

    EllipticProblem p = Lstar;
    p.rhs = Field(g, 0.0, true);
    p.dirichlet_trace = extract_trace(ansatz);
    const Field V0 = solve_dirichlet(p, tol);

    CGOSolution sol;
    sol.freq = freq;
    sol.phase = phase;
    sol.V0 = V0;

    sol.remainder = Field(g);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            sol.remainder.at(i, j) = V0.at(i, j) / ansatz.at(i, j) - 1.0;
        }
    }
    sol.remainder_sup_inner = max_abs_inset(sol.remainder, 0.25);

    const MagneticData mag = build_magnetic(set, u0);
    sol.transport_res = transport_residual(mag, freq, phase);

    const Field applied = apply_elliptic(Lstar, V0);
    const double op_scale = 8.0 * max_abs(Lstar.a) / (g.h * g.h) * std::max(max_abs(V0), 1e-300);
    sol.interior_residual = max_abs_interior(applied) / op_scale;
    return sol;
}

namespace {

void check_probe_point(const GridSpec& g, int node_id) {
    const double x = g.x(g.ix(node_id)), y = g.y(g.jy(node_id));
    const double dist = std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
    if (dist < 0.25 - 1e-12) {
        throw std::invalid_argument("probe: point closer than 0.25 to the boundary");
    }
}

}  // namespace

cplx probe_value(const CGOSolution& sol, const CoefficientSet& set, int node_id) {
    const GridSpec& g = sol.V0.grid;
    check_probe_point(g, node_id);
    if (sol.freq.tau <= 0.0) throw std::invalid_argument("probe_value: tau must be positive");
    const Field dqv = divergence_form(set.q, sol.V0);
    const cplx zx = sol.freq.zeta[0] * g.x(g.ix(node_id)) + sol.freq.zeta[1] * g.y(g.jy(node_id));
    return std::exp(-(zx + sol.phase[node_id])) * dqv[node_id] / sol.freq.tau;
}

cplx probe_limit(const CoefficientSet& set, const Field& u0, const ComplexFrequency& freq,
                 int node_id) {
    const GridSpec& g = u0.grid;
    check_probe_point(g, node_id);
    const MagneticData mag = build_magnetic(set, u0);
    auto [qx, qy] = gradient(set.q);
    const cplx zh1 = freq.zeta[0] / std::max(freq.tau, 1e-300);
    const cplx zh2 = freq.zeta[1] / std::max(freq.tau, 1e-300);
    return (set.q[node_id] * mag.Zx[node_id] + qx[node_id]) * zh1 +
           (set.q[node_id] * mag.Zy[node_id] + qy[node_id]) * zh2;
}

namespace {

// Catmull-Rom bicubic sample of a grid field. C^1 across cells, so the
// interpolation roughness does not cap the oscillatory-quadrature decay
// the way a piecewise-linear sample would.
cplx bicubic(const Field& f, double x, double y) {
    const GridSpec& g = f.grid;
    const double fx = std::clamp(x, 0.0, 1.0) / g.h;
    const double fy = std::clamp(y, 0.0, 1.0) / g.h;
    int i = std::min(static_cast<int>(fx), g.n - 2);
    int j = std::min(static_cast<int>(fy), g.n - 2);
    const double sx = fx - i, sy = fy - j;
    auto weights = [](double t, double w[4]) {
        w[0] = 0.5 * (-t + 2 * t * t - t * t * t);
        w[1] = 0.5 * (2 - 5 * t * t + 3 * t * t * t);
        w[2] = 0.5 * (t + 4 * t * t - 3 * t * t * t);
        w[3] = 0.5 * (-t * t + t * t * t);
    };
    double wx[4], wy[4];
    weights(sx, wx);
    weights(sy, wy);
    cplx s = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int jj = std::clamp(j - 1 + b, 0, g.n - 1);
        cplx row = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int ii = std::clamp(i - 1 + a, 0, g.n - 1);
            row += wx[a] * f.at(ii, jj);
        }
        s += wy[b] * row;
    }
    return s;
}

// Plateau cutoff: 1 on the middle half of the support square, smooth
// exponential transition to 0 at the edge of [0.05, 0.95]^2. The smooth
// ramp keeps the oscillatory integrand free of stencil-visible kinks, so
// non-stationary contributions decay fast.
double support_bump(double x, double y) {
    auto ramp = [](double u) {  // 1 at u<=0, 0 at u>=1, C-infinity between
        if (u <= 0.0) return 1.0;
        if (u >= 1.0) return 0.0;
        const double a = std::exp(-1.0 / (1.0 - u));
        const double b = std::exp(-1.0 / u);
        return a / (a + b);
    };
    auto p = [&](double t) { return ramp((std::abs(t) - 0.5) * 2.0); };
    return p((x - 0.5) / 0.45) * p((y - 0.5) / 0.45);
}

// Composite trapezoid of fn * exp(4i(x-x0)(y-y0)/h') over the square,
// resolving the oscillation (about 24 points per radian bound).
cplx oscillatory_integral(const std::function<cplx(double, double)>& fn, double x0, double y0,
                          double hp) {
    int M = static_cast<int>(std::ceil(24.0 / hp));
    M = std::clamp(M, 257, 4097);
    if (M % 2 == 0) ++M;
    const double dx = 1.0 / (M - 1);
    cplx sum = 0.0;
    for (int b = 0; b < M; ++b) {
        const double y = b * dx;
        const double wy = (b == 0 || b == M - 1) ? 0.5 : 1.0;
        for (int a = 0; a < M; ++a) {
            const double x = a * dx;
            const double wx = (a == 0 || a == M - 1) ? 0.5 : 1.0;
            const double phase = 4.0 * (x - x0) * (y - y0) / hp;
            sum += wx * wy * fn(x, y) * cplx(std::cos(phase), std::sin(phase));
        }
    }
    return sum * dx * dx;
}

}  // namespace

StationaryPhaseReport stationary_phase_probe(const Field& f, std::array<double, 2> z0,
                                             const std::vector<double>& h_list) {
    const double dist = std::min(std::min(z0[0], 1.0 - z0[0]), std::min(z0[1], 1.0 - z0[1]));
    if (dist < 0.25 - 1e-12) {
        throw std::invalid_argument("stationary_phase_probe: z0 closer than 0.25 to the boundary");
    }
    auto fn = [&f](double x, double y) { return bicubic(f, x, y) * support_bump(x, y); };

    StationaryPhaseReport rep;
    for (double hp : h_list) {
        if (!(hp > 0.0)) throw std::invalid_argument("stationary_phase_probe: h' must be positive");
        StationaryPhasePoint p;
        p.hprime = hp;
        p.integral = oscillatory_integral(fn, z0[0], z0[1], hp);
        p.scaled = p.integral / hp;
        rep.points.push_back(p);
    }
    if (!rep.points.empty()) rep.limit_estimate = rep.points.back().scaled;
    return rep;
}

double stationary_phase_constant() {
    static const double c = [] {
        // Gaussian reference (amplitude 1 at z0), dense quadrature,
        // Richardson extrapolation in h'^2.
        const double s = 0.1;
        auto fn = [s](double x, double y) {
            const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
            return cplx(std::exp(-r2 / (2.0 * s * s)) * support_bump(x, y), 0.0);
        };
        const double h1 = 1.0 / 128.0, h2 = 1.0 / 256.0;
        const cplx r1 = oscillatory_integral(fn, 0.5, 0.5, h1) / h1;
        const cplx r2 = oscillatory_integral(fn, 0.5, 0.5, h2) / h2;
        return ((4.0 * r2 - r1) / 3.0).real();
    }();
    return c;
}

}  // namespace qlab
