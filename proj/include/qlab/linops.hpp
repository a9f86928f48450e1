#pragma once

#include <cstdint>

#include "qlab/elliptic.hpp"
#include "qlab/forward.hpp"

namespace qlab {

/// Derived fields of the magnetic-Schrodinger reduction of the
/// linearized equation: -lap v + X.grad v + R v = 0 rewritten as
/// -(d_j + iA_j)^2 v + Q v = 0, plus the adjoint-side drift Z.
struct MagneticData {
    Field Xx, Xy;
    Field R;
    Field Ax, Ay;  // A = iX/2, purely imaginary
    Field Q;       // |X|^2/4 - div(X)/2 + R
    Field Zx, Zy;  // Z = -(grad sigma + u0 grad q)/Theta
    Field Theta;   // sigma + q u0
    double q_route_gap = 0.0;  // |Q - closed form| / scale, O(h^2)
};

/// L  = (a,b,c) = (sigma+q u0, q grad u0, div(q grad u0)),
/// L* = (a,b,c) = (sigma+q u0, -q grad u0, 0).
std::pair<EllipticProblem, EllipticProblem> build_linearized(const CoefficientSet& set,
                                                             const Field& u0);

MagneticData build_magnetic(const CoefficientSet& set, const Field& u0);

/// Random smooth complex field with exactly zero boundary trace
/// (seeded combination of low sine modes).
Field random_smooth_field(const GridSpec& g, std::uint64_t seed);

/// |<f, L g> - <L* f, g>| / (|f| |g|) maximized over seeded trials.
double adjoint_pairing_gap(const EllipticProblem& L, const EllipticProblem& Lstar, int trials,
                           std::uint64_t seed);

struct TwoGridReport {
    double gap_coarse = 0.0;
    double gap_fine = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

/// Runs adjoint_pairing_gap on a coarse/fine pair of linearizations and
/// checks order-2 decay (ratio in [3,5], or both gaps at machine floor).
TwoGridReport verify_adjoint_pairing(const EllipticProblem& L_coarse,
                                     const EllipticProblem& Ls_coarse,
                                     const EllipticProblem& L_fine,
                                     const EllipticProblem& Ls_fine, int trials,
                                     std::uint64_t seed);

/// Applies -lap v - 2i A.grad v + (-i div A + A.A + Q) v on interior nodes.
/// div A can be supplied when a cleaner discretization of it exists
/// (e.g. div(A + grad phi) = div A + lap phi avoids nesting one-sided
/// first differences, which would cost an order at the boundary ring).
Field apply_magnetic(const Field& Ax, const Field& Ay, const Field& Q, const Field& v,
                     const Field* divA = nullptr);

/// The same operator as an assembleable Dirichlet problem
/// (a,b,c) = (-1, -2iA, -i div A + A.A + Q).
EllipticProblem magnetic_problem(const Field& Ax, const Field& Ay, const Field& Q,
                                 const std::vector<cplx>& trace, const Field* divA = nullptr);

/// || L_{A+grad phi,Q}(e^{-i phi} v) - e^{-i phi} L_{A,Q} v ||_inf / ||v||_inf.
/// phi must be purely imaginary with zero boundary trace.
double gauge_conjugation_residual(const MagneticData& mag, const Field& phi, const Field& v);

}  // namespace qlab
