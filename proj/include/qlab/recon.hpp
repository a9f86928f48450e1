#pragma once

#include "qlab/cgo.hpp"
#include "qlab/dnmap.hpp"
#include "qlab/forward.hpp"
#include "qlab/linops.hpp"

namespace qlab {

/// Boundary determination of sigma_hat = sigma - sigma_tilde by the
/// two-background subtraction: where the magnetic potentials of the two
/// backgrounds differ (margin > delta), the algebra forces
/// sigma_hat = 0 and grad sigma_hat = 0 at the node.
struct BoundaryDeterminationReport {
    std::vector<int> node_ids;  // non-corner boundary nodes
    std::vector<double> margin;  // |A - A_check| per node
    std::vector<bool> determinate;
    std::vector<double> recovered_sigma_hat;  // 0 where determinate
    std::vector<double> true_sigma_hat;       // sigma_A - sigma_B at the node
    std::vector<double> true_grad_norm;       // |grad(sigma_A - sigma_B)|
    int determinate_count = 0;
    double max_inconsistency = 0.0;  // |recovered - true| over determinate nodes
    double delta = 0.0;
};

BoundaryDeterminationReport boundary_sigma_determination(
    const CoefficientSet& A, const CoefficientSet& B, const std::vector<cplx>& f0,
    const std::vector<cplx>& probe_mode, double eps, double delta = 1e-6, double tol = 1e-10);

/// Solves div(q grad B) = 0, B = trace (default 1) on the boundary, and
/// reports the deviation from the constant solution.
struct BRecoveryReport {
    double deviation_from_one = 0.0;
    bool positive_q = false;
};

BRecoveryReport verify_B_recovery(const Field& q, const std::vector<cplx>* trace = nullptr,
                                  double tol = 1e-10);

/// CGO certificates that div(q grad V0)(x0) stays away from zero, which
/// forces the gauge factor (1 - e^{2i phi}) to vanish at certified points.
struct ARecoveryPoint {
    int node_id = 0;
    double x = 0.0, y = 0.0;
    cplx probe = 0.0;      // div(q grad V0)(x0), unnormalized
    cplx limit = 0.0;      // P(x0)
    double threshold = 0.0;
    bool certified = false;
    cplx gauge_residual = 0.0;  // e^{2i phi}(x0) - 1 for the candidate phi
};

struct ARecoveryReport {
    std::vector<ARecoveryPoint> points;
    int certified_count = 0;
    double tau = 0.0;
};

ARecoveryReport verify_A_recovery(const CoefficientSet& set, const Field& u0,
                                  const std::vector<int>& x0_nodes, double tau,
                                  std::array<double, 2> d, const Field* phi_candidate = nullptr,
                                  double tol = 1e-10);

/// Rows of the coupled elliptic system for two backgrounds:
/// r1 = -2i div(A - A_tilde), r2 = Q - Q_tilde, with the matrix M and
/// det(M) = -q/Theta^2 from the first set.
struct SystemResidual {
    Field r1, r2;
    Field M11, M12, M21, M22;
    Field detM;
    double detM_identity_gap = 0.0;  // max |detM + q/Theta^2|
    double r1_norm = 0.0, r2_norm = 0.0;
};

SystemResidual system_residual(const CoefficientSet& A, const Field& u0,
                               const CoefficientSet& B, const Field& u0_tilde);

/// End-to-end discrimination harness over DN data of orders 0..2.
struct UniquenessRow {
    std::string name;
    DNComparison cmp;
    std::string verdict;  // indistinguishable | discriminated | inconclusive
    int discriminating_order = -1;
    int discriminating_mode = -1;
};

UniquenessRow uniqueness_experiment(const std::string& name, const CoefficientSet& A,
                                    const CoefficientSet& B, const std::vector<cplx>& f0,
                                    const BoundaryBasis& basis, double eps, double tol = 1e-10);

}  // namespace qlab
