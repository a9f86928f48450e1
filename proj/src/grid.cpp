#include "qlab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qlab {

GridSpec build_grid(int n_per_side) {
    if (n_per_side < 9) {
        throw std::invalid_argument("build_grid: grid too coarse (n_per_side must be >= 9)");
    }
    GridSpec g;
    g.n = n_per_side;
    g.h = 1.0 / (n_per_side - 1);
    return g;
}

std::vector<int> GridSpec::interior_index_set() const {
    std::vector<int> out;
    out.reserve(interior_count());
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) out.push_back(id(i, j));
    return out;
}

std::vector<int> GridSpec::boundary_index_set() const {
    std::vector<int> out;
    out.reserve(boundary_count());
    for (const auto& b : boundary_cycle(*this)) out.push_back(b.id);
    return out;
}

std::vector<BoundaryNode> boundary_cycle(const GridSpec& g) {
    const int n = g.n;
    const double h = g.h;
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<BoundaryNode> cyc;
    cyc.reserve(g.boundary_count());
    auto push = [&](int i, int j, double s, double nx, double ny) {
        BoundaryNode b;
        b.id = g.id(i, j);
        b.i = i;
        b.j = j;
        b.s = s;
        b.corner = g.is_corner(i, j);
        if (b.corner) {
            // average of the two adjacent edge normals, normalized
            b.nx = (i == 0 ? -r : r);
            b.ny = (j == 0 ? -r : r);
        } else {
            b.nx = nx;
            b.ny = ny;
        }
        cyc.push_back(b);
    };
    for (int i = 0; i < n - 1; ++i) push(i, 0, i * h, 0.0, -1.0);
    for (int j = 0; j < n - 1; ++j) push(n - 1, j, 1.0 + j * h, 1.0, 0.0);
    for (int i = n - 1; i > 0; --i) push(i, n - 1, 2.0 + (n - 1 - i) * h, 0.0, 1.0);
    for (int j = n - 1; j > 0; --j) push(0, j, 3.0 + (n - 1 - j) * h, -1.0, 0.0);
    return cyc;
}

Field make_field(const GridSpec& g, const std::function<cplx(double, double)>& f) {
    Field out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) out.at(i, j) = f(g.x(i), g.y(j));
    return out;
}

Field make_real_field(const GridSpec& g, const std::function<double(double, double)>& f) {
    Field out(g, 0.0, true);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) out.at(i, j) = cplx(f(g.x(i), g.y(j)), 0.0);
    return out;
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (!(a.grid == b.grid)) {
        throw std::invalid_argument(std::string(where) + ": fields live on different grids");
    }
}

Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b, "operator+");
    Field out(a.grid);
    out.real_flag = a.real_flag && b.real_flag;
    for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] + b.v[k];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b, "operator-");
    Field out(a.grid);
    out.real_flag = a.real_flag && b.real_flag;
    for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] - b.v[k];
    return out;
}

Field operator*(const Field& a, const Field& b) {
    require_same_grid(a, b, "operator*");
    Field out(a.grid);
    out.real_flag = a.real_flag && b.real_flag;
    for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] * b.v[k];
    return out;
}

Field operator*(cplx s, const Field& a) {
    Field out(a.grid);
    out.real_flag = a.real_flag && s.imag() == 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = s * a.v[k];
    return out;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (const auto& z : f.v) m = std::max(m, std::abs(z));
    return m;
}

double max_abs_interior(const Field& f) {
    const int n = f.grid.n;
    double m = 0.0;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) m = std::max(m, std::abs(f.at(i, j)));
    return m;
}

double max_abs_inset(const Field& f, double margin) {
    const GridSpec& g = f.grid;
    double m = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double d = std::min(std::min(g.x(i), 1.0 - g.x(i)), std::min(g.y(j), 1.0 - g.y(j)));
            if (d >= margin - 1e-14) m = std::max(m, std::abs(f.at(i, j)));
        }
    }
    return m;
}

namespace {

// One-sided 3-point first derivative at index 0 toward increasing index.
inline cplx dx_onesided(cplx f0, cplx f1, cplx f2, double h) {
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}

// One-sided 4-point second derivative at index 0 toward increasing index.
inline cplx dxx_onesided(cplx f0, cplx f1, cplx f2, cplx f3, double h) {
    return (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
}

inline cplx ddx(const Field& f, int i, int j) {
    const GridSpec& g = f.grid;
    const double h = g.h;
    if (i == 0) return dx_onesided(f.at(0, j), f.at(1, j), f.at(2, j), h);
    if (i == g.n - 1)
        return -dx_onesided(f.at(i, j), f.at(i - 1, j), f.at(i - 2, j), h);
    return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h);
}

inline cplx ddy(const Field& f, int i, int j) {
    const GridSpec& g = f.grid;
    const double h = g.h;
    if (j == 0) return dx_onesided(f.at(i, 0), f.at(i, 1), f.at(i, 2), h);
    if (j == g.n - 1)
        return -dx_onesided(f.at(i, j), f.at(i, j - 1), f.at(i, j - 2), h);
    return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
}

inline cplx d2x(const Field& f, int i, int j) {
    const GridSpec& g = f.grid;
    const double h = g.h;
    if (i == 0) return dxx_onesided(f.at(0, j), f.at(1, j), f.at(2, j), f.at(3, j), h);
    if (i == g.n - 1)
        return dxx_onesided(f.at(i, j), f.at(i - 1, j), f.at(i - 2, j), f.at(i - 3, j), h);
    return (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) / (h * h);
}

inline cplx d2y(const Field& f, int i, int j) {
    const GridSpec& g = f.grid;
    const double h = g.h;
    if (j == 0) return dxx_onesided(f.at(i, 0), f.at(i, 1), f.at(i, 2), f.at(i, 3), h);
    if (j == g.n - 1)
        return dxx_onesided(f.at(i, j), f.at(i, j - 1), f.at(i, j - 2), f.at(i, j - 3), h);
    return (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / (h * h);
}

}  // namespace

std::pair<Field, Field> gradient(const Field& f) {
    Field gx(f.grid), gy(f.grid);
    gx.real_flag = gy.real_flag = f.real_flag;
    for (int j = 0; j < f.grid.n; ++j) {
        for (int i = 0; i < f.grid.n; ++i) {
            gx.at(i, j) = ddx(f, i, j);
            gy.at(i, j) = ddy(f, i, j);
        }
    }
    return {gx, gy};
}

Field laplacian(const Field& f) {
    Field out(f.grid);
    out.real_flag = f.real_flag;
    for (int j = 0; j < f.grid.n; ++j)
        for (int i = 0; i < f.grid.n; ++i) out.at(i, j) = d2x(f, i, j) + d2y(f, i, j);
    return out;
}

Field divergence_form(const Field& a, const Field& f) {
    require_same_grid(a, f, "divergence_form");
    const GridSpec& g = f.grid;
    const int n = g.n;
    const double h2 = g.h * g.h;
    Field out(g);
    out.real_flag = a.real_flag && f.real_flag;
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const cplx ac = a.at(i, j);
            const cplx ae = 0.5 * (ac + a.at(i + 1, j));
            const cplx aw = 0.5 * (ac + a.at(i - 1, j));
            const cplx an = 0.5 * (ac + a.at(i, j + 1));
            const cplx as = 0.5 * (ac + a.at(i, j - 1));
            out.at(i, j) = (ae * (f.at(i + 1, j) - f.at(i, j)) - aw * (f.at(i, j) - f.at(i - 1, j)) +
                            an * (f.at(i, j + 1) - f.at(i, j)) - as * (f.at(i, j) - f.at(i, j - 1))) /
                           h2;
        }
    }
    // Boundary nodes: expanded form with one-sided stencils.
    for (const auto& b : boundary_cycle(g)) {
        const int i = b.i, j = b.j;
        out.at(i, j) = a.at(i, j) * (d2x(f, i, j) + d2y(f, i, j)) +
                       ddx(a, i, j) * ddx(f, i, j) + ddy(a, i, j) * ddy(f, i, j);
    }
    return out;
}

Field divergence(const Field& fx, const Field& fy) {
    require_same_grid(fx, fy, "divergence");
    Field out(fx.grid);
    out.real_flag = fx.real_flag && fy.real_flag;
    for (int j = 0; j < fx.grid.n; ++j)
        for (int i = 0; i < fx.grid.n; ++i) out.at(i, j) = ddx(fx, i, j) + ddy(fy, i, j);
    return out;
}

cplx normal_derivative_at(const Field& f, int id) {
    const GridSpec& g = f.grid;
    const int i = g.ix(id), j = g.jy(id);
    if (!g.is_boundary(i, j)) {
        throw std::invalid_argument("normal_derivative_at: node is interior");
    }
    // Directional derivative along the outward normal; corners use the
    // averaged normal with one-sided components.
    double nx = 0.0, ny = 0.0;
    if (g.is_corner(i, j)) {
        const double r = 1.0 / std::sqrt(2.0);
        nx = (i == 0 ? -r : r);
        ny = (j == 0 ? -r : r);
    } else if (i == 0) {
        nx = -1.0;
    } else if (i == g.n - 1) {
        nx = 1.0;
    } else if (j == 0) {
        ny = -1.0;
    } else {
        ny = 1.0;
    }
    cplx d = 0.0;
    if (nx != 0.0) d += nx * ddx(f, i, j);
    if (ny != 0.0) d += ny * ddy(f, i, j);
    return d;
}

std::vector<cplx> normal_derivative(const Field& f) {
    std::vector<cplx> out;
    const auto cyc = boundary_cycle(f.grid);
    out.reserve(cyc.size());
    for (const auto& b : cyc) out.push_back(normal_derivative_at(f, b.id));
    return out;
}

cplx integrate(const Field& f, Region region) {
    const GridSpec& g = f.grid;
    const int n = g.n;
    if (region == Region::interior) {
        cplx sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            for (int i = 0; i < n; ++i) {
                const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
                sum += wi * wj * f.at(i, j);
            }
        }
        return g.h * g.h * sum;
    }
    // Closed-curve composite trapezoid: every boundary node carries weight h.
    cplx sum = 0.0;
    for (const auto& b : boundary_cycle(g)) sum += f[b.id];
    return g.h * sum;
}

std::vector<cplx> extract_trace(const Field& f) {
    std::vector<cplx> out;
    const auto cyc = boundary_cycle(f.grid);
    out.reserve(cyc.size());
    for (const auto& b : cyc) out.push_back(f[b.id]);
    return out;
}

void set_trace(Field& f, const std::vector<cplx>& trace) {
    const auto cyc = boundary_cycle(f.grid);
    if (trace.size() != cyc.size()) {
        throw std::invalid_argument("set_trace: trace size mismatch");
    }
    for (size_t k = 0; k < cyc.size(); ++k) f[cyc[k].id] = trace[k];
}

void write_field_csv(const std::string& path, const Field& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
    os << "x,y,re,im\n";
    char buf[160];
    const GridSpec& g = f.grid;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const cplx z = f.at(i, j);
            std::snprintf(buf, sizeof(buf), "%.16e,%.16e,%.16e,%.16e\n", g.x(i), g.y(j),
                          z.real(), z.imag());
            os << buf;
        }
    }
}

Field read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_field_csv: cannot open " + path);
    std::string line;
    std::getline(is, line);  // header
    std::vector<double> xs, ys, re, im;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a, b, c, d;
        char comma;
        ss >> a >> comma >> b >> comma >> c >> comma >> d;
        if (!ss) throw std::runtime_error("read_field_csv: malformed row in " + path);
        xs.push_back(a);
        ys.push_back(b);
        re.push_back(c);
        im.push_back(d);
    }
    const int count = static_cast<int>(xs.size());
    const int n = static_cast<int>(std::lround(std::sqrt(double(count))));
    if (n * n != count || n < 9) {
        throw std::runtime_error("read_field_csv: node count is not a valid lattice");
    }
    GridSpec g = build_grid(n);
    Field f(g);
    bool real = true;
    for (int k = 0; k < count; ++k) {
        const int i = k % n, j = k / n;
        if (std::abs(xs[k] - g.x(i)) > 1e-12 || std::abs(ys[k] - g.y(j)) > 1e-12) {
            throw std::runtime_error("read_field_csv: coordinates do not match the unit lattice");
        }
        f.at(i, j) = cplx(re[k], im[k]);
        real = real && im[k] == 0.0;
    }
    f.real_flag = real;
    return f;
}

}  // namespace qlab
