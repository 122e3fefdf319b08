#include "caginalp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace caginalp {

Grid::Grid(int dim, std::array<double, 2> extent, std::array<int, 2> nodes)
    : dim_(dim), extent_(extent), nodes_(nodes) {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
    for (int ax = 0; ax < dim_; ++ax) {
        if (nodes_[ax] < 3) throw std::invalid_argument("Grid: need at least 3 nodes per axis");
        if (!(extent_[ax] > 0.0)) throw std::invalid_argument("Grid: extent must be positive");
    }
}

std::shared_ptr<const Grid> Grid::interval(double length, int nodes) {
    return std::shared_ptr<const Grid>(new Grid(1, {length, 0.0}, {nodes, 1}));
}

std::shared_ptr<const Grid> Grid::rectangle(double lx, double ly, int nx, int ny) {
    return std::shared_ptr<const Grid>(new Grid(2, {lx, ly}, {nx, ny}));
}

double Grid::measure() const {
    return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1];
}

double Grid::quad_weight(int idx) const {
    const int ix = idx % nodes_[0];
    double w = spacing(0) * ((ix == 0 || ix == nodes_[0] - 1) ? 0.5 : 1.0);
    if (dim_ == 2) {
        const int iy = idx / nodes_[0];
        w *= spacing(1) * ((iy == 0 || iy == nodes_[1] - 1) ? 0.5 : 1.0);
    }
    return w;
}

bool Grid::same_as(const Grid& other) const {
    return dim_ == other.dim_ && nodes_ == other.nodes_ && extent_ == other.extent_;
}

Field::Field(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_ ? grid_->node_count() : 0, fill) {
    if (!grid_) throw std::invalid_argument("Field: null grid");
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("Field: null grid");
    if (static_cast<int>(values_.size()) != grid_->node_count())
        throw std::invalid_argument("Field: value count does not match grid");
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

Trajectory::Trajectory(GridPtr grid, double dt, int steps, double fill)
    : grid_(std::move(grid)), dt_(dt) {
    if (!grid_) throw std::invalid_argument("Trajectory: null grid");
    if (!(dt_ > 0.0)) throw std::invalid_argument("Trajectory: dt must be positive");
    if (steps < 1) throw std::invalid_argument("Trajectory: need at least one step");
    frames_.assign(steps + 1, Field(grid_, fill));
}

Trajectory::Trajectory(GridPtr grid, double dt, std::vector<Field> frames)
    : grid_(std::move(grid)), dt_(dt), frames_(std::move(frames)) {
    if (!grid_) throw std::invalid_argument("Trajectory: null grid");
    if (!(dt_ > 0.0)) throw std::invalid_argument("Trajectory: dt must be positive");
    if (frames_.size() < 2) throw std::invalid_argument("Trajectory: need at least 2 frames");
    for (const Field& f : frames_)
        if (f.grid().get() != grid_.get() && !f.grid()->same_as(*grid_))
            throw std::invalid_argument("Trajectory: frame grid mismatch");
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
    if (a.grid().get() == b.grid().get()) return;
    if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid()))
        throw std::invalid_argument(std::string(what) + ": fields on different grids");
}

void require_same_slab(const Trajectory& a, const Trajectory& b, const char* what) {
    if (a.steps() != b.steps() || a.dt() != b.dt())
        throw std::invalid_argument(std::string(what) + ": trajectories on different time slabs");
    if (a.grid().get() != b.grid().get() && !a.grid()->same_as(*b.grid()))
        throw std::invalid_argument(std::string(what) + ": trajectories on different grids");
}

namespace {

void check_finite(const Field& f, const char* what) {
    if (!f.all_finite())
        throw SolverError(std::string(what) + ": produced a non-finite value");
}

}  // namespace

Field laplacian_neumann(const Field& f) {
    const Grid& g = *f.grid();
    Field out(f.grid());
    const int nx = g.nodes(0);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    if (g.dim() == 1) {
        // Mirrored ghost: ghost value equals the first interior neighbor.
        for (int i = 0; i < nx; ++i) {
            const double left = (i == 0) ? f[1] : f[i - 1];
            const double right = (i == nx - 1) ? f[nx - 2] : f[i + 1];
            out[i] = (left - 2.0 * f[i] + right) * ihx2;
        }
    } else {
        const int ny = g.nodes(1);
        const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const int i = iy * nx + ix;
                const double left = (ix == 0) ? f[i + 1] : f[i - 1];
                const double right = (ix == nx - 1) ? f[i - 1] : f[i + 1];
                const double down = (iy == 0) ? f[i + nx] : f[i - nx];
                const double up = (iy == ny - 1) ? f[i - nx] : f[i + nx];
                out[i] = (left - 2.0 * f[i] + right) * ihx2 +
                         (down - 2.0 * f[i] + up) * ihy2;
            }
        }
    }
    check_finite(out, "laplacian_neumann");
    return out;
}

double norm_lp_omega(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm_lp_omega: p must be >= 1");
    const Grid& g = *f.grid();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i)
        acc += std::pow(std::abs(f[i]), p) * g.quad_weight(i);
    return std::pow(acc, 1.0 / p);
}

namespace {

// Integral of |f|^p over Omega (the p-th power of the norm).
double lp_power_integral(const Field& f, double p) {
    const Grid& g = *f.grid();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i)
        acc += std::pow(std::abs(f[i]), p) * g.quad_weight(i);
    return acc;
}

double time_weight(int k, int last, double dt) {
    return (k == 0 || k == last) ? 0.5 * dt : dt;
}

}  // namespace

double norm_lp_q(const Trajectory& t, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm_lp_q: p must be >= 1");
    const int n = t.steps();
    double acc = 0.0;
    for (int k = 0; k <= n; ++k)
        acc += lp_power_integral(t.frame(k), p) * time_weight(k, n, t.dt());
    return std::pow(acc, 1.0 / p);
}

double h1_seminorm(const Field& f) {
    const Grid& g = *f.grid();
    const int nx = g.nodes(0);
    const double hx = g.spacing(0);
    double acc = 0.0;
    if (g.dim() == 1) {
        for (int i = 0; i < nx; ++i) {
            double gx;
            if (i == 0)
                gx = (f[1] - f[0]) / hx;
            else if (i == nx - 1)
                gx = (f[nx - 1] - f[nx - 2]) / hx;
            else
                gx = (f[i + 1] - f[i - 1]) / (2.0 * hx);
            acc += gx * gx * g.quad_weight(i);
        }
    } else {
        const int ny = g.nodes(1);
        const double hy = g.spacing(1);
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const int i = iy * nx + ix;
                double gx, gy;
                if (ix == 0)
                    gx = (f[i + 1] - f[i]) / hx;
                else if (ix == nx - 1)
                    gx = (f[i] - f[i - 1]) / hx;
                else
                    gx = (f[i + 1] - f[i - 1]) / (2.0 * hx);
                if (iy == 0)
                    gy = (f[i + nx] - f[i]) / hy;
                else if (iy == ny - 1)
                    gy = (f[i] - f[i - nx]) / hy;
                else
                    gy = (f[i + nx] - f[i - nx]) / (2.0 * hy);
                acc += (gx * gx + gy * gy) * g.quad_weight(i);
            }
        }
    }
    return std::sqrt(acc);
}

double mean(const Field& f) {
    const Grid& g = *f.grid();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i) acc += f[i] * g.quad_weight(i);
    return acc / g.measure();
}

double inner_product_omega(const Field& a, const Field& b) {
    require_same_grid(a, b, "inner_product_omega");
    const Grid& g = *a.grid();
    double acc = 0.0;
    for (int i = 0; i < a.size(); ++i) acc += a[i] * b[i] * g.quad_weight(i);
    return acc;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (int i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

double max_abs(const Trajectory& t) {
    double m = 0.0;
    for (const Field& f : t.frames()) m = std::max(m, max_abs(f));
    return m;
}

Field linear_combination(double a, const Field& x, double b, const Field& y) {
    require_same_grid(x, y, "linear_combination");
    Field out(x.grid());
    for (int i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

Trajectory linear_combination(double a, const Trajectory& x, double b, const Trajectory& y) {
    require_same_slab(x, y, "linear_combination");
    std::vector<Field> frames;
    frames.reserve(x.steps() + 1);
    for (int k = 0; k <= x.steps(); ++k)
        frames.push_back(linear_combination(a, x.frame(k), b, y.frame(k)));
    return Trajectory(x.grid(), x.dt(), std::move(frames));
}

double max_nodal_difference(const Field& a, const Field& b) {
    require_same_grid(a, b, "max_nodal_difference");
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double distance_l2_q(const Trajectory& a, const Trajectory& b) {
    return norm_lp_q(linear_combination(1.0, a, -1.0, b), 2.0);
}

// ---------------------------------------------------------------------------
// CSV snapshots
// ---------------------------------------------------------------------------

namespace {

void write_frame_rows(std::ostream& os, const Field& f, double t) {
    const Grid& g = *f.grid();
    for (int i = 0; i < f.size(); ++i) {
        os << t << ',' << g.x_of(i);
        if (g.dim() == 2) os << ',' << g.y_of(i);
        os << ',' << f[i] << '\n';
    }
}

}  // namespace

void write_csv(std::ostream& os, const Field& f, double t) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << (f.grid()->dim() == 1 ? "t,x,value\n" : "t,x,y,value\n");
    write_frame_rows(os, f, t);
}

void write_csv(std::ostream& os, const Trajectory& t) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << (t.grid()->dim() == 1 ? "t,x,value\n" : "t,x,y,value\n");
    for (int k = 0; k <= t.steps(); ++k) write_frame_rows(os, t.frame(k), t.time_of(k));
}

void write_csv_file(const std::string& path, const Trajectory& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_csv_file: cannot open " + path);
    write_csv(os, t);
}

Trajectory read_trajectory_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("read_trajectory_csv: empty input");
    const bool two_d = header.find(",y,") != std::string::npos;

    std::vector<double> times;
    std::vector<std::vector<double>> frames;
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double t, x, y = 0.0, v;
        char c;
        ls >> t >> c >> x >> c;
        if (two_d) ls >> y >> c;
        ls >> v;
        if (!ls) throw std::runtime_error("read_trajectory_csv: malformed row: " + line);
        if (times.empty() || t != times.back()) {
            times.push_back(t);
            frames.emplace_back();
        }
        frames.back().push_back(v);
        if (times.size() == 1) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    if (times.size() < 2) throw std::runtime_error("read_trajectory_csv: need at least 2 frames");

    const int total = static_cast<int>(xs.size());
    int nx = total;
    double lx = xs.back();
    GridPtr grid;
    if (two_d) {
        nx = 1;
        while (nx < total && xs[nx] > xs[nx - 1]) ++nx;
        const int ny = total / nx;
        lx = xs[nx - 1];
        grid = Grid::rectangle(lx, ys.back(), nx, ny);
    } else {
        grid = Grid::interval(lx, nx);
    }

    std::vector<Field> fields;
    fields.reserve(frames.size());
    for (auto& vals : frames) {
        if (static_cast<int>(vals.size()) != total)
            throw std::runtime_error("read_trajectory_csv: ragged frame");
        fields.emplace_back(grid, std::move(vals));
    }
    const double dt = times[1] - times[0];
    return Trajectory(grid, dt, std::move(fields));
}

Trajectory read_trajectory_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_trajectory_csv_file: cannot open " + path);
    return read_trajectory_csv(is);
}

}  // namespace caginalp
