#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dpeigen {

// Conforming simplicial mesh of an interval (dimension 1, segment elements
// with 2-point Gauss quadrature, exact for cubics) or of an axis-aligned
// rectangle split into right triangles (dimension 2, 3-point interior
// quadrature, exact for quadratics). Immutable after construction.
//
// Quadrature points are enumerated element-major: the global index of local
// point k on element e is e * quadrature_per_element() + k. Per-quadrature-
// point data (exponent samples, densities) always follows this order.
class Mesh {
public:
  int dimension() const noexcept { return dimension_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t element_count() const noexcept { return element_measures_.size(); }
  int nodes_per_element() const noexcept { return dimension_ + 1; }
  int quadrature_per_element() const noexcept { return quadrature_per_element_; }
  std::size_t quadrature_count() const noexcept { return quad_weights_.size(); }

  std::array<double, 2> node(std::size_t i) const { return nodes_[i]; }
  int element_node(std::size_t e, int local) const {
    return element_nodes_[e * static_cast<std::size_t>(nodes_per_element()) +
                          static_cast<std::size_t>(local)];
  }
  double element_measure(std::size_t e) const { return element_measures_[e]; }
  double total_measure() const noexcept { return total_measure_; }

  bool is_boundary_node(std::size_t i) const { return boundary_mask_[i] != 0; }
  const std::vector<std::size_t>& boundary_nodes() const noexcept {
    return boundary_nodes_;
  }
  std::size_t interior_node_count() const noexcept {
    return node_count() - boundary_nodes_.size();
  }

  double quadrature_weight(std::size_t qp) const { return quad_weights_[qp]; }
  std::array<double, 2> quadrature_point(std::size_t qp) const {
    return {quad_points_[2 * qp], quad_points_[2 * qp + 1]};
  }
  // Value of the local P1 basis function `local` at quadrature point qp
  // (qp must belong to the element owning that basis function).
  double basis_value(std::size_t qp, int local) const {
    return quad_basis_[qp * static_cast<std::size_t>(nodes_per_element()) +
                       static_cast<std::size_t>(local)];
  }
  // Gradient of the local P1 basis function on element e (constant there).
  std::array<double, 2> basis_gradient(std::size_t e, int local) const {
    std::size_t base =
        2 * (e * static_cast<std::size_t>(nodes_per_element()) +
             static_cast<std::size_t>(local));
    return {basis_gradients_[base], basis_gradients_[base + 1]};
  }

  // Axis-aligned bounding box of the domain.
  std::array<double, 2> lower_corner() const noexcept { return lower_; }
  std::array<double, 2> upper_corner() const noexcept { return upper_; }

private:
  Mesh() = default;
  friend Mesh build_interval_mesh(double a, double b, int n_elements);
  friend Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1,
                                   int nx, int ny);

  int dimension_ = 1;
  int quadrature_per_element_ = 2;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<int> element_nodes_;       // element-major, nodes_per_element each
  std::vector<double> element_measures_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<char> boundary_mask_;
  std::vector<double> quad_weights_;     // per quadrature point
  std::vector<double> quad_points_;      // (x, y) pairs per quadrature point
  std::vector<double> quad_basis_;       // basis values, nodes_per_element each
  std::vector<double> basis_gradients_;  // per element per local node, (gx, gy)
  double total_measure_ = 0.0;
  std::array<double, 2> lower_ = {0.0, 0.0};
  std::array<double, 2> upper_ = {0.0, 0.0};
};

// Uniform mesh of (a, b) with n_elements segments. Requires a < b and
// n_elements >= 2 (there must be at least one interior node).
Mesh build_interval_mesh(double a, double b, int n_elements);

// Structured triangulation of (x0, x1) x (y0, y1): nx * ny cells, two right
// triangles each. Requires nonempty ranges and nx, ny >= 2.
Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx,
                          int ny);

// Piecewise-linear function given by nodal values; values at boundary nodes
// are forced to zero on construction (homogeneous Dirichlet data).
class DiscreteFunction {
public:
  explicit DiscreteFunction(const Mesh& mesh);
  DiscreteFunction(const Mesh& mesh, std::vector<double> nodal_values);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::vector<double>& nodal_values() const noexcept { return values_; }
  double value(std::size_t node) const { return values_[node]; }

  DiscreteFunction scaled(double factor) const;

private:
  const Mesh* mesh_;
  std::vector<double> values_;
};

// Nodal interpolation of a pointwise function; on 1D meshes the y argument
// is passed as zero. Throws std::domain_error if f produces a non-finite
// value at any node.
DiscreteFunction interpolate(const std::function<double(double, double)>& f,
                             const Mesh& mesh);

// Per-element gradient of the P1 interpolant, flattened as (gx, gy) pairs
// (gy = 0 on 1D meshes).
std::vector<double> element_gradients(const DiscreteFunction& u);

// Values of u at every quadrature point, mesh enumeration order.
std::vector<double> values_at_quadrature(const DiscreteFunction& u);

// Euclidean norm of the element gradient, repeated for each quadrature point
// of the element (P1 gradients are constant per element).
std::vector<double> gradient_magnitude_at_quadrature(const DiscreteFunction& u);

// Quadrature sum of a per-quadrature-point density. The density length must
// equal mesh.quadrature_count().
double integrate(const std::vector<double>& density, const Mesh& mesh);

// CSV export: node coordinates ("x" or "x,y") plus a "value" column.
void write_function_csv(const DiscreteFunction& u, const std::string& path);
// CSV export of node coordinates only.
void write_mesh_csv(const Mesh& mesh, const std::string& path);

}  // namespace dpeigen
