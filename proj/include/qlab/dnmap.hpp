#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "qlab/forward.hpp"
#include "qlab/linops.hpp"

namespace qlab {

/// Real Fourier modes along the boundary arclength parameter s in [0,4),
/// orthonormal in the discrete boundary inner product <u,v> = h sum u v.
struct BoundaryBasis {
    GridSpec grid;
    int k_max = 0;
    int size() const { return 2 * k_max; }
    /// m even -> cos((m/2+1) pi s / 2), m odd -> sin; normalized.
    std::vector<cplx> mode(int m) const;
    std::string mode_name(int m) const;
};

BoundaryBasis make_fourier_basis(const GridSpec& g, int k_max);

/// Default frequency cutoff n_per_side/4: resolvable on the cycle.
BoundaryBasis make_fourier_basis(const GridSpec& g);

/// Non-corner boundary node ids in cycle order (rows of every DN object).
std::vector<int> noncorner_boundary_ids(const GridSpec& g);

/// Normal-derivative samples at non-corner boundary nodes.
std::vector<cplx> noncorner_normal_derivative(const Field& u);

/// Discrete DN data: basis coefficients in, normal-derivative samples at
/// non-corner boundary nodes out.
struct DNMatrix {
    std::vector<int> row_ids;
    Eigen::MatrixXd entries;
    std::vector<std::string> col_names;
    // base point of the linearization; absent for the full nonlinear map
    std::optional<std::vector<cplx>> base_f0;
    std::optional<Field> base_u0;
};

void write_dn_csv(const std::string& path, const GridSpec& g, const DNMatrix& dn);

/// Nonlinear DN map: solves the forward problem for trace f and samples
/// the outward normal derivative (corners excluded).
std::vector<double> dn_apply(const CoefficientSet& set, const std::vector<cplx>& f,
                             const Field* guess = nullptr, double tol = 1e-10);

/// First-order central finite difference of the DN map around f0,
/// one column per basis mode. eps must lie in [1e-5, 1e-1].
DNMatrix fd_linearize_first(const CoefficientSet& set, const std::vector<cplx>& f0,
                            const BoundaryBasis& basis, double eps, double tol = 1e-10);

/// Mixed second-order stencil for the pair (j,k) of basis modes.
std::vector<double> fd_linearize_second(const CoefficientSet& set, const std::vector<cplx>& f0,
                                        const BoundaryBasis& basis, int j, int k, double eps,
                                        double tol = 1e-10);

/// Solves L V = 0 with V = f on the boundary.
Field solve_linearized(const EllipticProblem& L, const std::vector<cplx>& f, double tol = 1e-10);

/// Solves L w = -div(q V1 grad V2) - div(q V2 grad V1), w = 0 on the boundary.
Field solve_second(const EllipticProblem& L, const Field& q, const Field& V1, const Field& V2,
                   double tol = 1e-10);

/// Both sides of the second-linearization integral identity; corners are
/// excluded from the boundary quadrature, limiting the order to O(h).
struct SecondIdentityReport {
    cplx lhs = 0.0;
    cplx rhs = 0.0;
    double gap = 0.0;
    double scale = 0.0;
    double rel_gap = 0.0;
};

SecondIdentityReport verify_second_identity(const CoefficientSet& set, const Field& u0,
                                            const Field& V0, const Field& V1, const Field& V2,
                                            const Field& w);

/// Empirical repeatability floor of the DN pipeline per linearization
/// order: re-runs with a perturbed Newton guess and differences.
struct DNFloor {
    double order0 = 0.0;
    double order1 = 0.0;
    double order2 = 0.0;
};

DNFloor measure_dn_floor(const CoefficientSet& set, const std::vector<cplx>& f0,
                         const BoundaryBasis& basis, double eps, double tol = 1e-10);

/// DN data of two coefficient sets compared at orders 0..2 around f0.
/// margin2 uses the mode pairs (0,0) and (0,1).
struct DNComparison {
    double margin0 = 0.0;
    double margin1 = 0.0;
    double margin2 = 0.0;
    int worst_mode1 = -1;
    DNFloor floor;
};

DNComparison compare_dn(const CoefficientSet& A, const CoefficientSet& B,
                        const std::vector<cplx>& f0, const BoundaryBasis& basis, double eps,
                        double tol = 1e-10, bool with_floor = true);

/// Largest eps from a fixed ladder for which every +/- eps mode solve
/// converges (the practical size of the accessible boundary neighborhood).
double largest_converged_eps(const CoefficientSet& set, const std::vector<cplx>& f0,
                             const BoundaryBasis& basis, double tol = 1e-10);

}  // namespace qlab
