#pragma once

#include <array>

#include "qlab/forward.hpp"
#include "qlab/linops.hpp"

namespace qlab {

/// zeta = (tau/sqrt(2)) (d + i d_perp) with zeta.zeta = 0, |zeta| = tau.
struct ComplexFrequency {
    std::array<cplx, 2> zeta{};
    double tau = 0.0;
    std::array<double, 2> d{};
    std::array<double, 2> d_perp{};
};

ComplexFrequency make_frequency(std::array<double, 2> d, double tau);

/// Solves the transport equation zeta.grad(phi) = zeta.Z/2 for the CGO
/// corrector phase. Spectral inversion of (d_d + i d_perp) on a doubled
/// periodic box: the right-hand side is C^2-extended past the square,
/// cut off beyond the 1.2-dilation, its box mean handled by the analytic
/// particular solution mean*(d.x). Zero-mean convention pins phi.
/// Requires odd n (box nodes align with grid nodes).
Field solve_transport(const MagneticData& mag, const ComplexFrequency& freq);

/// || zeta.grad(phi) + i zeta.B ||_inf / tau over all nodes (B = iZ/2).
double transport_residual(const MagneticData& mag, const ComplexFrequency& freq,
                          const Field& phase);

struct CGOSolution {
    ComplexFrequency freq;
    Field phase;
    Field V0;
    Field remainder;  // e^{-zeta.x - phi} V0 - 1
    double transport_res = 0.0;
    double interior_residual = 0.0;  // scaled residual of L* V0 on interior nodes
    double remainder_sup_inner = 0.0;  // sup |r| on [0.25,0.75]^2
};

/// Solves L* V0 = 0 with the CGO ansatz e^{zeta.x + phi} as Dirichlet
/// data. Requires tau*h <= 1.5 so the grid resolves the oscillation.
CGOSolution build_cgo(const CoefficientSet& set, const Field& u0, const ComplexFrequency& freq,
                      const Field& phase, double tol = 1e-10);

/// D(tau) = e^{-(zeta.x0 + phi(x0))} div(q grad V0)(x0) / tau.
/// x0 must lie at least 0.25 from the boundary.
cplx probe_value(const CGOSolution& sol, const CoefficientSet& set, int node_id);

/// Predicted limit P = (qZ + grad q) . zeta_hat at the node
/// (= -q^2 grad(sigma/q) . zeta_hat / Theta).
cplx probe_limit(const CoefficientSet& set, const Field& u0, const ComplexFrequency& freq,
                 int node_id);

/// Oscillatory probe I(h') = int f exp((Phi - conj Phi)/h'), Phi = (z-z0)^2.
struct StationaryPhasePoint {
    double hprime = 0.0;
    cplx integral = 0.0;
    cplx scaled = 0.0;  // I(h')/h'
};

struct StationaryPhaseReport {
    std::vector<StationaryPhasePoint> points;
    cplx limit_estimate = 0.0;  // last I/h'
};

/// f is multiplied by a fixed C^2 support bump before integration;
/// z0 must lie at least 0.25 from the boundary. Quadrature density is
/// chosen from h' so the oscillation is resolved.
StationaryPhaseReport stationary_phase_probe(const Field& f, std::array<double, 2> z0,
                                             const std::vector<double>& h_list);

/// The limit constant c in I(h')/h' -> c f(z0), calibrated once against
/// a dense-quadrature Gaussian reference and cached.
double stationary_phase_constant();

}  // namespace qlab
