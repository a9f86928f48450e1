#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qlab/grid.hpp"

using namespace qlab;

namespace {

// Max-norm error of a discrete operator against an analytic reference,
// over interior nodes.
double interior_error(const Field& got, const Field& want) {
    return max_abs_interior(got - want);
}

}  // namespace

TEST_CASE("grid counts and spacing") {
    const GridSpec g9 = build_grid(9);
    CHECK(g9.node_count() == 81);
    CHECK(g9.boundary_count() == 32);
    CHECK(g9.h == doctest::Approx(0.125).epsilon(1e-15));

    const GridSpec g33 = build_grid(33);
    CHECK(g33.h == doctest::Approx(0.03125).epsilon(1e-15));

    CHECK_THROWS_WITH_AS(build_grid(5), doctest::Contains("grid too coarse"),
                         std::invalid_argument);
}

TEST_CASE("index partition and normals") {
    const GridSpec g = build_grid(9);
    const auto interior = g.interior_index_set();
    const auto boundary = g.boundary_index_set();
    CHECK(interior.size() + boundary.size() == static_cast<size_t>(g.node_count()));
    std::vector<bool> seen(g.node_count(), false);
    for (int id : interior) {
        CHECK(!seen[id]);
        seen[id] = true;
    }
    for (int id : boundary) {
        CHECK(!seen[id]);
        seen[id] = true;
    }
    for (const auto& b : boundary_cycle(g)) {
        CHECK(std::hypot(b.nx, b.ny) == doctest::Approx(1.0).epsilon(1e-14));
    }
    // arclength spacing is uniform h around the cycle
    const auto cyc = boundary_cycle(g);
    for (size_t k = 1; k < cyc.size(); ++k) {
        CHECK(cyc[k].s - cyc[k - 1].s == doctest::Approx(g.h).epsilon(1e-12));
    }
}

TEST_CASE("gradient exact on linear fields") {
    const GridSpec g = build_grid(17);
    const Field f = make_real_field(g, [](double x, double y) { return x + 2.0 * y; });
    auto [gx, gy] = gradient(f);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            CHECK(gx.at(i, j).real() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(gy.at(i, j).real() == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("laplacian exact on quadratics") {
    const GridSpec g = build_grid(17);
    const Field f = make_real_field(g, [](double x, double y) { return x * x + y * y; });
    const Field lap = laplacian(f);
    for (int j = 1; j < g.n - 1; ++j)
        for (int i = 1; i < g.n - 1; ++i)
            CHECK(lap.at(i, j).real() == doctest::Approx(4.0).epsilon(1e-11));
}

TEST_CASE("divergence_form converges at order 2") {
    auto err_at = [](int n) {
        const GridSpec g = build_grid(n);
        const Field a = make_real_field(g, [](double, double) { return 1.0; });
        const Field f =
            make_real_field(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
        const Field want = cplx(-2.0 * M_PI * M_PI, 0.0) * f;
        return interior_error(divergence_form(a, f), want);
    };
    const double e1 = err_at(33), e2 = err_at(65);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("stencil convergence order for the other operators") {
    auto fields = [](int n) {
        const GridSpec g = build_grid(n);
        return make_real_field(g, [](double x, double y) { return std::exp(x) * std::sin(y + 0.3); });
    };
    auto exact_gx = [](const GridSpec& g) {
        return make_real_field(g, [](double x, double y) { return std::exp(x) * std::sin(y + 0.3); });
    };

    SUBCASE("gradient") {
        auto err = [&](int n) {
            const Field f = fields(n);
            auto [gx, gy] = gradient(f);
            return max_abs(gx - exact_gx(f.grid));
        };
        const double r = err(33) / err(65);
        CHECK(r > 3.5);
        CHECK(r < 4.5);
    }
    SUBCASE("laplacian") {
        auto err = [](int n) {
            const GridSpec g = build_grid(n);
            const Field f = make_real_field(g, [](double x, double y) {
                return std::exp(2.0 * x) * std::cos(y);
            });
            const Field want = make_real_field(g, [](double x, double y) {
                return 3.0 * std::exp(2.0 * x) * std::cos(y);
            });
            return max_abs(laplacian(f) - want);
        };
        const double r = err(33) / err(65);
        CHECK(r > 3.5);
        CHECK(r < 4.5);
    }
    SUBCASE("normal derivative") {
        auto err = [&](int n) {
            const GridSpec g = build_grid(n);
            const Field f = make_real_field(g, [](double x, double y) {
                return std::exp(x) * std::cos(2.0 * y);
            });
            double worst = 0.0;
            for (const auto& b : boundary_cycle(g)) {
                if (b.corner) continue;
                const double x = g.x(b.i), y = g.y(b.j);
                const double dx = std::exp(x) * std::cos(2.0 * y);
                const double dy = -2.0 * std::exp(x) * std::sin(2.0 * y);
                const double want = b.nx * dx + b.ny * dy;
                worst = std::max(worst, std::abs(normal_derivative_at(f, b.id) - want));
            }
            return worst;
        };
        const double r = err(33) / err(65);
        CHECK(r > 3.5);
        CHECK(r < 4.5);
    }
}

TEST_CASE("normal derivative rejects interior nodes") {
    const GridSpec g = build_grid(9);
    const Field f(g, 1.0, true);
    CHECK_THROWS_AS((void)normal_derivative_at(f, g.id(4, 4)), std::invalid_argument);
}

TEST_CASE("integration weights") {
    const GridSpec g = build_grid(21);
    const Field one(g, 1.0, true);
    CHECK(integrate(one, Region::interior).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(one, Region::boundary).real() == doctest::Approx(4.0).epsilon(1e-14));
    const Field fx = make_real_field(g, [](double x, double) { return x; });
    CHECK(integrate(fx, Region::interior).real() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discrete integration by parts decays at order 2") {
    auto gap = [](int n) {
        const GridSpec g = build_grid(n);
        auto zero_bd = [](Field f) {
            for (const auto& b : boundary_cycle(f.grid)) f[b.id] = 0.0;
            return f;
        };
        const Field f = zero_bd(make_real_field(g, [](double x, double y) {
            return std::sin(M_PI * x) * std::sin(M_PI * y) * (1.0 + 0.5 * x);
        }));
        const Field w = zero_bd(make_real_field(g, [](double x, double y) {
            return std::sin(M_PI * x) * std::sin(2.0 * M_PI * y) +
                   0.7 * std::sin(M_PI * x) * std::sin(M_PI * y);
        }));
        const Field a = make_real_field(g, [](double x, double y) { return 2.0 + x + 0.5 * y; });
        auto [fx, fy] = gradient(f);
        auto [wx, wy] = gradient(w);
        const cplx lhs = integrate(f * divergence_form(a, w), Region::interior);
        const cplx rhs = cplx(-1.0, 0.0) * integrate(a * (fx * wx + fy * wy), Region::interior);
        return std::abs(lhs - rhs);
    };
    const double g1 = gap(33), g2 = gap(65);
    CHECK(g2 < std::max(g1 / 3.0, 1e-13));
}

TEST_CASE("diff and integrate are linear") {
    const GridSpec g = build_grid(17);
    const Field f = make_field(g, [](double x, double y) { return cplx(std::sin(3 * x), y * y); });
    const Field w = make_field(g, [](double x, double y) { return cplx(x * y, std::cos(2 * y)); });
    const cplx alpha(1.7, -0.3);
    const Field combo = alpha * f + w;

    const Field lhs = laplacian(combo);
    const Field rhs = alpha * laplacian(f) + laplacian(w);
    CHECK(max_abs(lhs - rhs) < 1e-9);

    const cplx il = integrate(combo, Region::interior);
    const cplx ir = alpha * integrate(f, Region::interior) + integrate(w, Region::interior);
    CHECK(std::abs(il - ir) < 1e-13);
}

TEST_CASE("field CSV round trip") {
    const GridSpec g = build_grid(9);
    const Field f = make_field(g, [](double x, double y) { return cplx(x * y, x - y); });
    const std::string path = (std::filesystem::temp_directory_path() / "qlab_field_test.csv").string();
    write_field_csv(path, f);
    const Field back = read_field_csv(path);
    CHECK(back.grid.n == g.n);
    CHECK(max_abs(back - f) < 1e-15);
    std::filesystem::remove(path);
}

TEST_CASE("mismatched grids are rejected") {
    const Field a(build_grid(9), 1.0, true);
    const Field b(build_grid(17), 1.0, true);
    CHECK_THROWS_AS((void)(a + b), std::invalid_argument);
    CHECK_THROWS_AS((void)divergence_form(a, b), std::invalid_argument);
}
