#include <doctest.h>

#include <cmath>

#include "qlab/elliptic.hpp"

using namespace qlab;

namespace {

Field const_field(const GridSpec& g, double v) { return Field(g, v, true); }

EllipticProblem laplace_problem(const GridSpec& g, const Field& rhs,
                                const std::vector<cplx>& trace) {
    return make_divergence_problem(const_field(g, 1.0), rhs, trace);
}

std::vector<cplx> trace_of(const GridSpec& g, const std::function<double(double, double)>& f) {
    std::vector<cplx> tr;
    for (const auto& b : boundary_cycle(g)) tr.emplace_back(f(g.x(b.i), g.y(b.j)), 0.0);
    return tr;
}

cplx matrix_entry(const LinearSystem& sys, int row_node, int col_node) {
    const int r = sys.row_of_node[row_node];
    const int c = sys.row_of_node[col_node];
    REQUIRE(r >= 0);
    REQUIRE(c >= 0);
    return sys.A.coeff(r, c);
}

}  // namespace

TEST_CASE("assemble: five-point Laplacian") {
    const GridSpec g = build_grid(9);
    const double h2 = g.h * g.h;
    const Field zero = const_field(g, 0.0);
    const std::vector<cplx> tr(g.boundary_count(), 0.0);
    const LinearSystem sys = assemble(laplace_problem(g, zero, tr));

    const int c = g.id(4, 4);
    CHECK(matrix_entry(sys, c, c).real() == doctest::Approx(-4.0 / h2));
    CHECK(matrix_entry(sys, c, g.id(5, 4)).real() == doctest::Approx(1.0 / h2));
    CHECK(matrix_entry(sys, c, g.id(3, 4)).real() == doctest::Approx(1.0 / h2));
    CHECK(matrix_entry(sys, c, g.id(4, 5)).real() == doctest::Approx(1.0 / h2));
    CHECK(matrix_entry(sys, c, g.id(4, 3)).real() == doctest::Approx(1.0 / h2));
}

TEST_CASE("assemble: zeroth-order and convection terms") {
    const GridSpec g = build_grid(9);
    const double h2 = g.h * g.h;
    const Field zero = const_field(g, 0.0);
    const std::vector<cplx> tr(g.boundary_count(), 0.0);

    EllipticProblem p = make_problem(const_field(g, 1.0), zero, zero, const_field(g, -1.0), zero, tr);
    const LinearSystem sys_c = assemble(p);
    const int c = g.id(4, 4);
    CHECK(matrix_entry(sys_c, c, c).real() == doctest::Approx(-4.0 / h2 - 1.0));

    EllipticProblem pb =
        make_problem(const_field(g, 1.0), const_field(g, 1.0), zero, zero, zero, tr);
    const LinearSystem sys_b = assemble(pb);
    CHECK(matrix_entry(sys_b, c, g.id(5, 4)).real() == doctest::Approx(1.0 / h2 + 1.0 / (2 * g.h)));
    CHECK(matrix_entry(sys_b, c, g.id(3, 4)).real() == doctest::Approx(1.0 / h2 - 1.0 / (2 * g.h)));
}

TEST_CASE("solve: harmonic linear data is stencil-exact") {
    const GridSpec g = build_grid(17);
    auto lin = [](double x, double y) { return x + 2.0 * y; };
    const Field v = solve_dirichlet(laplace_problem(g, const_field(g, 0.0), trace_of(g, lin)));
    const Field want = make_real_field(g, lin);
    CHECK(max_abs(v - want) < 1e-12);
}

TEST_CASE("solve: manufactured sine converges at order 2") {
    auto err = [](int n) {
        const GridSpec g = build_grid(n);
        const Field rhs = make_real_field(g, [](double x, double y) {
            return -2.0 * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y);
        });
        const std::vector<cplx> tr(g.boundary_count(), 0.0);
        const Field v = solve_dirichlet(laplace_problem(g, rhs, tr));
        const Field want = make_real_field(g, [](double x, double y) {
            return std::sin(M_PI * x) * std::sin(M_PI * y);
        });
        return max_abs(v - want);
    };
    const double e1 = err(33), e2 = err(65);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("solve: zero data gives the zero solution") {
    const GridSpec g = build_grid(9);
    const std::vector<cplx> tr(g.boundary_count(), 0.0);
    const Field v = solve_dirichlet(laplace_problem(g, const_field(g, 0.0), tr));
    CHECK(max_abs(v) == 0.0);
}

TEST_CASE("discrete minimum principle on maximum-principle instances") {
    const GridSpec g = build_grid(33);
    // a = 2 + x, drift, c = 0; g <= 0; sign-changing trace.
    const Field a = make_real_field(g, [](double x, double) { return 2.0 + x; });
    const Field bx = make_real_field(g, [](double, double y) { return 0.5 * y; });
    const Field zero = const_field(g, 0.0);
    const Field rhs = make_real_field(g, [](double x, double y) {
        return -std::exp(-x - y);  // g <= 0
    });
    const auto tr = trace_of(g, [](double x, double y) { return std::cos(2.0 * M_PI * (x + y)); });
    EllipticProblem p = make_problem(a, bx, zero, zero, rhs, tr);
    p.maximum_principle = true;
    const Field v = solve_dirichlet(p);

    double min_all = 1e300, min_bd = 1e300;
    for (int k = 0; k < g.node_count(); ++k) min_all = std::min(min_all, v[k].real());
    for (const auto& b : boundary_cycle(g)) min_bd = std::min(min_bd, v[b.id].real());
    CHECK(min_all >= min_bd - 1e-12);
}

TEST_CASE("adjoint consistency of the solve") {
    const GridSpec g = build_grid(33);
    const Field a = make_real_field(g, [](double x, double y) { return 1.5 + 0.25 * x * y; });
    const Field bx = make_real_field(g, [](double, double y) { return 0.3 * y; });
    const Field by = make_real_field(g, [](double x, double) { return -0.2 * x; });
    const Field c = make_real_field(g, [](double x, double) { return -0.5 - 0.1 * x; });
    const std::vector<cplx> tr(g.boundary_count(), 0.0);

    auto zero_bd = [](Field f) {
        for (const auto& b : boundary_cycle(f.grid)) f[b.id] = 0.0;
        return f;
    };
    const Field f = zero_bd(make_real_field(g, [](double x, double y) {
        return std::sin(M_PI * x) * std::sin(M_PI * y);
    }));
    const Field w = zero_bd(make_real_field(g, [](double x, double y) {
        return std::sin(2 * M_PI * x) * std::sin(M_PI * y) * (1.0 + 0.3 * x);
    }));

    EllipticProblem p = make_problem(a, bx, by, c, f, tr);
    const Field u = solve_dirichlet(p);  // L u = f
    EllipticProblem padj = formal_adjoint(p);
    padj.rhs = w;
    const Field z = solve_dirichlet(padj);  // L' z = w

    const cplx lhs = integrate(u * w, Region::interior);
    const cplx rhs = integrate(f * z, Region::interior);
    CHECK(std::abs(lhs - rhs) < 5e-4 * std::abs(lhs));
}

TEST_CASE("nonconforming inputs are rejected") {
    const GridSpec g9 = build_grid(9);
    const GridSpec g17 = build_grid(17);
    const Field a(g9, 1.0, true), wrong(g17, 1.0, true);
    const Field zero(g9, 0.0, true);
    const std::vector<cplx> tr(g9.boundary_count(), 0.0);
    CHECK_THROWS_AS(make_problem(a, wrong, zero, zero, zero, tr), std::invalid_argument);
    std::vector<cplx> short_tr(3, 0.0);
    CHECK_THROWS_AS(make_divergence_problem(a, zero, short_tr), std::invalid_argument);
}

TEST_CASE("solver failure carries the achieved residual") {
    // a == 0 makes the interior operator singular.
    const GridSpec g = build_grid(9);
    const Field a(g, 0.0, true);
    const Field zero(g, 0.0, true);
    const Field rhs(g, 1.0, true);
    const std::vector<cplx> tr(g.boundary_count(), 0.0);
    CHECK_THROWS_AS((void)solve_dirichlet(make_divergence_problem(a, rhs, tr)), solve_error);
}
