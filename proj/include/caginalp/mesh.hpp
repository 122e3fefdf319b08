// Uniform rectangular meshes in 1-D/2-D with homogeneous Neumann boundaries,
// nodal scalar fields, time-indexed trajectories over the space-time cylinder,
// and the discrete differential operators / norms built on trapezoidal
// quadrature.

#ifndef CAGINALP_MESH_HPP
#define CAGINALP_MESH_HPP

#include <array>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace caginalp {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Uniform tensor grid on [0,Lx] (x [0,Ly]).  Nodes sit on the boundary;
/// spacing is L/(n-1).  Node index is row-major with x fastest:
/// idx = iy*nx + ix.
class Grid {
  public:
    static std::shared_ptr<const Grid> interval(double length, int nodes);
    static std::shared_ptr<const Grid> rectangle(double lx, double ly, int nx, int ny);

    int dim() const { return dim_; }
    int nodes(int axis) const { return nodes_[axis]; }
    double extent(int axis) const { return extent_[axis]; }
    double spacing(int axis) const { return extent_[axis] / (nodes_[axis] - 1); }
    int node_count() const { return nodes_[0] * nodes_[1]; }
    double measure() const;  // |Omega|

    double x_of(int idx) const { return (idx % nodes_[0]) * spacing(0); }
    double y_of(int idx) const {
        return dim_ == 1 ? 0.0 : (idx / nodes_[0]) * spacing(1);
    }
    /// Trapezoidal quadrature weight of a node (boundary nodes half-weighted
    /// per axis).
    double quad_weight(int idx) const;

    bool same_as(const Grid& other) const;

  private:
    Grid(int dim, std::array<double, 2> extent, std::array<int, 2> nodes);
    int dim_;
    std::array<double, 2> extent_;
    std::array<int, 2> nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Nodal scalar field at one time level. Treated as immutable by all grid
/// operations; mutation is only meant for construction.
class Field {
  public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0);
    Field(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const { return grid_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    double& operator[](int i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }

    bool all_finite() const;

  private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Sequence of fields over Q = Omega x (0,T], frame 0 holding the initial
/// data, so frames() == steps()+1 and T == steps()*dt().
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(GridPtr grid, double dt, int steps, double fill = 0.0);
    Trajectory(GridPtr grid, double dt, std::vector<Field> frames);

    const GridPtr& grid() const { return grid_; }
    double dt() const { return dt_; }
    int steps() const { return static_cast<int>(frames_.size()) - 1; }
    double duration() const { return dt_ * steps(); }
    double time_of(int k) const { return dt_ * k; }

    const Field& frame(int k) const { return frames_[k]; }
    Field& frame(int k) { return frames_[k]; }
    const std::vector<Field>& frames() const { return frames_; }

  private:
    GridPtr grid_;
    double dt_ = 0.0;
    std::vector<Field> frames_;
};

void require_same_grid(const Field& a, const Field& b, const char* what);
void require_same_slab(const Trajectory& a, const Trajectory& b, const char* what);

// ---------------------------------------------------------------------------
// Discrete operators and norms
// ---------------------------------------------------------------------------

/// Second-order centered Laplacian with mirrored ghost nodes (zero normal
/// derivative on every face).
Field laplacian_neumann(const Field& f);

/// Discrete L^p(Omega) norm, trapezoidal weights. p >= 1 required.
double norm_lp_omega(const Field& f, double p);

/// Discrete L^p(Q) norm: spatial trapezoid composed with temporal trapezoid.
double norm_lp_q(const Trajectory& t, double p);

/// Discrete H^1 seminorm at one time level (centered interior differences,
/// one-sided at the boundary).
double h1_seminorm(const Field& f);

/// Quadrature-weighted average over Omega.
double mean(const Field& f);

/// Weighted inner product <a,b> = sum_i w_i a_i b_i.
double inner_product_omega(const Field& a, const Field& b);

double max_abs(const Field& f);
double max_abs(const Trajectory& t);

/// a*x + b*y elementwise.
Field linear_combination(double a, const Field& x, double b, const Field& y);
Trajectory linear_combination(double a, const Trajectory& x, double b, const Trajectory& y);

/// max over nodes of |a-b| at the final frame, and discrete L^2(Q) distance.
double max_nodal_difference(const Field& a, const Field& b);
double distance_l2_q(const Trajectory& a, const Trajectory& b);

// ---------------------------------------------------------------------------
// Snapshot format: CSV with header t,x[,y],value, row-major node order,
// full-precision decimals.
// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const Field& f, double t);
void write_csv(std::ostream& os, const Trajectory& t);
void write_csv_file(const std::string& path, const Trajectory& t);

/// Reads a trajectory written by write_csv, reconstructing the uniform grid
/// from the coordinate columns.
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv_file(const std::string& path);

}  // namespace caginalp

#endif
