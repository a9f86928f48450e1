#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace qlab {

using cplx = std::complex<double>;

/// Uniform node-centered grid on the closed unit square.
/// Node (i,j) sits at (i*h, j*h), id = j*n + i, h = 1/(n-1).
struct GridSpec {
    int n = 0;
    double h = 0.0;

    int node_count() const { return n * n; }
    int id(int i, int j) const { return j * n + i; }
    int ix(int id) const { return id % n; }
    int jy(int id) const { return id / n; }
    double x(int i) const { return i * h; }
    double y(int j) const { return j * h; }
    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == n - 1 || j == n - 1;
    }
    bool is_corner(int i, int j) const {
        return (i == 0 || i == n - 1) && (j == 0 || j == n - 1);
    }
    int boundary_count() const { return 4 * (n - 1); }
    int interior_count() const { return (n - 2) * (n - 2); }

    std::vector<int> interior_index_set() const;
    std::vector<int> boundary_index_set() const;

    bool operator==(const GridSpec& o) const { return n == o.n; }
};

/// Builds the grid; rejects n_per_side < 9 ("grid too coarse").
GridSpec build_grid(int n_per_side);

/// One node of the boundary cycle, in arclength order (counterclockwise
/// from the origin). s is the arclength parameter in [0,4); (nx,ny) the
/// outward unit normal. Corners carry the normalized average of the two
/// adjacent edge normals.
struct BoundaryNode {
    int id = 0;
    int i = 0, j = 0;
    double s = 0.0;
    double nx = 0.0, ny = 0.0;
    bool corner = false;
};

std::vector<BoundaryNode> boundary_cycle(const GridSpec& g);

/// Complex-valued grid function. real_flag marks data whose imaginary
/// part is exactly zero (sigma, q, F, forward solutions).
struct Field {
    GridSpec grid;
    std::vector<cplx> v;
    bool real_flag = false;

    Field() = default;
    explicit Field(const GridSpec& g, cplx fill = 0.0, bool real = false)
        : grid(g), v(g.node_count(), fill), real_flag(real) {}

    cplx& at(int i, int j) { return v[grid.id(i, j)]; }
    cplx at(int i, int j) const { return v[grid.id(i, j)]; }
    cplx& operator[](int id) { return v[id]; }
    cplx operator[](int id) const { return v[id]; }
};

Field make_field(const GridSpec& g, const std::function<cplx(double, double)>& f);
Field make_real_field(const GridSpec& g, const std::function<double(double, double)>& f);

void require_same_grid(const Field& a, const Field& b, const char* where);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);  // pointwise
Field operator*(cplx s, const Field& a);

double max_abs(const Field& f);
double max_abs_interior(const Field& f);
/// Max |f| over nodes with min(x,1-x,y,1-y) >= margin.
double max_abs_inset(const Field& f, double margin);

/// Centered second-order gradient on interior nodes, one-sided 3-point
/// at the boundary. Returns (df/dx, df/dy).
std::pair<Field, Field> gradient(const Field& f);

/// Five-point Laplacian on interior nodes, one-sided 4-point second
/// differences on the boundary.
Field laplacian(const Field& f);

/// div(a grad f): conservative flux stencil with arithmetic-mean face
/// coefficients on interior nodes; expanded form a*lap + grad(a).grad(f)
/// on boundary nodes.
Field divergence_form(const Field& a, const Field& f);

/// Divergence of a vector field (component gradients, same stencils).
Field divergence(const Field& fx, const Field& fy);

/// Outward normal derivative at a boundary node (one-sided 3-point,
/// second order). Throws if id is an interior node.
cplx normal_derivative_at(const Field& f, int id);

/// Normal derivative along the whole boundary cycle.
std::vector<cplx> normal_derivative(const Field& f);

enum class Region { interior, boundary };

/// Trapezoid-weight quadrature over the square, or composite trapezoid
/// over the boundary arclength.
cplx integrate(const Field& f, Region region);

/// Boundary values in cycle order.
std::vector<cplx> extract_trace(const Field& f);
void set_trace(Field& f, const std::vector<cplx>& trace);

/// CSV with columns x,y,re,im (row-major, 17 significant digits).
void write_field_csv(const std::string& path, const Field& f);
Field read_field_csv(const std::string& path);

}  // namespace qlab
