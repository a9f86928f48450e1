#include "qlab/elliptic.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace qlab {

EllipticProblem make_problem(const Field& a, const Field& bx, const Field& by, const Field& c,
                             const Field& rhs, const std::vector<cplx>& trace) {
    require_same_grid(a, bx, "make_problem");
    require_same_grid(a, by, "make_problem");
    require_same_grid(a, c, "make_problem");
    require_same_grid(a, rhs, "make_problem");
    if (static_cast<int>(trace.size()) != a.grid.boundary_count()) {
        throw std::invalid_argument("make_problem: trace size mismatch");
    }
    EllipticProblem p;
    p.a = a;
    p.bx = bx;
    p.by = by;
    p.c = c;
    p.rhs = rhs;
    p.dirichlet_trace = trace;
    return p;
}

EllipticProblem make_divergence_problem(const Field& a, const Field& rhs,
                                        const std::vector<cplx>& trace) {
    Field zero(a.grid, 0.0, true);
    return make_problem(a, zero, zero, zero, rhs, trace);
}

LinearSystem assemble(const EllipticProblem& p) {
    const GridSpec& g = p.a.grid;
    const double h = g.h;
    const double h2 = h * h;

    LinearSystem sys;
    sys.interior_ids = g.interior_index_set();
    sys.row_of_node.assign(g.node_count(), -1);
    for (size_t r = 0; r < sys.interior_ids.size(); ++r) {
        sys.row_of_node[sys.interior_ids[r]] = static_cast<int>(r);
    }

    // Boundary values on a scratch field for elimination.
    Field bvals(g);
    {
        const auto cyc = boundary_cycle(g);
        for (size_t k = 0; k < cyc.size(); ++k) bvals[cyc[k].id] = p.dirichlet_trace[k];
    }

    const int m = static_cast<int>(sys.interior_ids.size());
    sys.b = Eigen::VectorXcd::Zero(m);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(5 * m);

    for (int r = 0; r < m; ++r) {
        const int id = sys.interior_ids[r];
        const int i = g.ix(id), j = g.jy(id);
        const cplx ac = p.a.at(i, j);
        const cplx ae = 0.5 * (ac + p.a.at(i + 1, j));
        const cplx aw = 0.5 * (ac + p.a.at(i - 1, j));
        const cplx an = 0.5 * (ac + p.a.at(i, j + 1));
        const cplx as = 0.5 * (ac + p.a.at(i, j - 1));
        const cplx bxc = p.bx.at(i, j) / (2.0 * h);
        const cplx byc = p.by.at(i, j) / (2.0 * h);

        const cplx wE = ae / h2 + bxc;
        const cplx wW = aw / h2 - bxc;
        const cplx wN = an / h2 + byc;
        const cplx wS = as / h2 - byc;
        const cplx wC = -(ae + aw + an + as) / h2 + p.c.at(i, j);

        trips.emplace_back(r, r, wC);
        sys.b(r) = p.rhs.at(i, j);

        auto couple = [&](int ii, int jj, cplx w) {
            const int nid = g.id(ii, jj);
            const int rr = sys.row_of_node[nid];
            if (rr >= 0) {
                trips.emplace_back(r, rr, w);
            } else {
                sys.b(r) -= w * bvals[nid];
            }
        };
        couple(i + 1, j, wE);
        couple(i - 1, j, wW);
        couple(i, j + 1, wN);
        couple(i, j - 1, wS);
    }

    sys.A.resize(m, m);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

Field solve_dirichlet(const EllipticProblem& p, double tol) {
    const LinearSystem sys = assemble(p);

    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
    lu.compute(sys.A);
    if (lu.info() != Eigen::Success) {
        throw solve_error("solve_dirichlet: factorization failed (singular system)", 1.0);
    }
    Eigen::VectorXcd x = lu.solve(sys.b);

    // Backward error check against the residual contract.
    const Eigen::VectorXcd r = sys.A * x - sys.b;
    double anorm = 0.0;
    for (int k = 0; k < sys.A.outerSize(); ++k) {
        double row = 0.0;
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(sys.A, k); it; ++it)
            row += std::abs(it.value());
        anorm = std::max(anorm, row);
    }
    const double xnorm = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    const double bnorm = sys.b.size() ? sys.b.cwiseAbs().maxCoeff() : 0.0;
    const double rnorm = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    const double denom = anorm * xnorm + bnorm;
    const double backward = denom > 0.0 ? rnorm / denom : rnorm;
    if (!(backward <= tol)) {
        throw solve_error("solve_dirichlet: residual target unmet", backward);
    }

    Field out(p.a.grid);
    for (size_t k = 0; k < sys.interior_ids.size(); ++k) out[sys.interior_ids[k]] = x(k);
    set_trace(out, p.dirichlet_trace);

    bool real = p.a.real_flag && p.bx.real_flag && p.by.real_flag && p.c.real_flag &&
                p.rhs.real_flag;
    for (const auto& z : p.dirichlet_trace) real = real && z.imag() == 0.0;
    if (real) {
        for (auto& z : out.v) z = cplx(z.real(), 0.0);
        out.real_flag = true;
    }
    return out;
}

Field apply_elliptic(const EllipticProblem& p, const Field& f) {
    require_same_grid(p.a, f, "apply_elliptic");
    const GridSpec& g = f.grid;
    const int n = g.n;
    const double h = g.h;
    const double h2 = h * h;
    Field out(g);
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const cplx ac = p.a.at(i, j);
            const cplx ae = 0.5 * (ac + p.a.at(i + 1, j));
            const cplx aw = 0.5 * (ac + p.a.at(i - 1, j));
            const cplx an = 0.5 * (ac + p.a.at(i, j + 1));
            const cplx as = 0.5 * (ac + p.a.at(i, j - 1));
            const cplx flux = (ae * (f.at(i + 1, j) - f.at(i, j)) -
                               aw * (f.at(i, j) - f.at(i - 1, j)) +
                               an * (f.at(i, j + 1) - f.at(i, j)) -
                               as * (f.at(i, j) - f.at(i, j - 1))) /
                              h2;
            const cplx conv = p.bx.at(i, j) * (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h) +
                              p.by.at(i, j) * (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
            out.at(i, j) = flux + conv + p.c.at(i, j) * f.at(i, j);
        }
    }
    return out;
}

EllipticProblem formal_adjoint(const EllipticProblem& p) {
    EllipticProblem q = p;
    q.bx = cplx(-1.0, 0.0) * p.bx;
    q.by = cplx(-1.0, 0.0) * p.by;
    q.c = p.c - divergence(p.bx, p.by);
    return q;
}

}  // namespace qlab
