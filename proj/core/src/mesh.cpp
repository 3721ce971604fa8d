#include "dpeigen/mesh.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dpeigen {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // 1 / (2 * sqrt(3))

}  // namespace

Mesh build_interval_mesh(double a, double b, int n_elements) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("interval mesh requires finite a < b");
  }
  if (n_elements < 2) {
    throw std::invalid_argument("interval mesh requires at least 2 elements");
  }

  Mesh mesh;
  mesh.dimension_ = 1;
  mesh.quadrature_per_element_ = 2;
  const std::size_t n = static_cast<std::size_t>(n_elements);
  const double h = (b - a) / n_elements;

  mesh.nodes_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double x = (i == n) ? b : a + h * static_cast<double>(i);
    mesh.nodes_[i] = {x, 0.0};
  }

  mesh.element_nodes_.reserve(2 * n);
  mesh.element_measures_.reserve(n);
  mesh.quad_weights_.reserve(2 * n);
  mesh.quad_points_.reserve(4 * n);
  mesh.quad_basis_.reserve(4 * n);
  mesh.basis_gradients_.reserve(4 * n);

  for (std::size_t e = 0; e < n; ++e) {
    double x_left = mesh.nodes_[e][0];
    double x_right = mesh.nodes_[e + 1][0];
    double measure = x_right - x_left;
    mesh.element_nodes_.push_back(static_cast<int>(e));
    mesh.element_nodes_.push_back(static_cast<int>(e + 1));
    mesh.element_measures_.push_back(measure);

    // Two-point Gauss rule, exact for polynomials of degree <= 3.
    for (double sign : {-1.0, 1.0}) {
      double xi = 0.5 + sign * kGaussOffset;  // local coordinate in [0, 1]
      mesh.quad_weights_.push_back(0.5 * measure);
      mesh.quad_points_.push_back(x_left + xi * measure);
      mesh.quad_points_.push_back(0.0);
      mesh.quad_basis_.push_back(1.0 - xi);
      mesh.quad_basis_.push_back(xi);
    }
    mesh.basis_gradients_.push_back(-1.0 / measure);
    mesh.basis_gradients_.push_back(0.0);
    mesh.basis_gradients_.push_back(1.0 / measure);
    mesh.basis_gradients_.push_back(0.0);
  }

  mesh.boundary_mask_.assign(n + 1, 0);
  mesh.boundary_mask_.front() = 1;
  mesh.boundary_mask_.back() = 1;
  mesh.boundary_nodes_ = {0, n};
  mesh.total_measure_ = b - a;
  mesh.lower_ = {a, 0.0};
  mesh.upper_ = {b, 0.0};
  return mesh;
}

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx,
                          int ny) {
  if (!(x0 < x1) || !(y0 < y1) || !std::isfinite(x0) || !std::isfinite(x1) ||
      !std::isfinite(y0) || !std::isfinite(y1)) {
    throw std::invalid_argument("rectangle mesh requires finite nonempty ranges");
  }
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("rectangle mesh requires nx, ny >= 2");
  }

  Mesh mesh;
  mesh.dimension_ = 2;
  mesh.quadrature_per_element_ = 3;
  const std::size_t cols = static_cast<std::size_t>(nx) + 1;
  const std::size_t rows = static_cast<std::size_t>(ny) + 1;
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;

  mesh.nodes_.resize(cols * rows);
  mesh.boundary_mask_.assign(cols * rows, 0);
  for (std::size_t j = 0; j < rows; ++j) {
    double y = (j + 1 == rows) ? y1 : y0 + hy * static_cast<double>(j);
    for (std::size_t i = 0; i < cols; ++i) {
      double x = (i + 1 == cols) ? x1 : x0 + hx * static_cast<double>(i);
      std::size_t id = j * cols + i;
      mesh.nodes_[id] = {x, y};
      if (i == 0 || j == 0 || i + 1 == cols || j + 1 == rows) {
        mesh.boundary_mask_[id] = 1;
        mesh.boundary_nodes_.push_back(id);
      }
    }
  }

  const std::size_t n_triangles = 2 * static_cast<std::size_t>(nx) *
                                  static_cast<std::size_t>(ny);
  mesh.element_nodes_.reserve(3 * n_triangles);
  mesh.element_measures_.reserve(n_triangles);
  mesh.quad_weights_.reserve(3 * n_triangles);
  mesh.quad_points_.reserve(6 * n_triangles);
  mesh.quad_basis_.reserve(9 * n_triangles);
  mesh.basis_gradients_.reserve(6 * n_triangles);

  // Interior three-point rule in barycentric coordinates, exact for
  // quadratics; all points lie strictly inside the triangle.
  constexpr double b1 = 2.0 / 3.0;
  constexpr double b2 = 1.0 / 6.0;
  const double barycentric[3][3] = {
      {b1, b2, b2}, {b2, b1, b2}, {b2, b2, b1}};

  auto addTriangle = [&](int na, int nb, int nc) {
    const auto& pa = mesh.nodes_[static_cast<std::size_t>(na)];
    const auto& pb = mesh.nodes_[static_cast<std::size_t>(nb)];
    const auto& pc = mesh.nodes_[static_cast<std::size_t>(nc)];
    double twice_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) -
                        (pc[0] - pa[0]) * (pb[1] - pa[1]);
    if (!(twice_area > 0.0)) {
      throw std::logic_error("triangle with non-positive area");
    }
    double area = 0.5 * twice_area;
    mesh.element_nodes_.push_back(na);
    mesh.element_nodes_.push_back(nb);
    mesh.element_nodes_.push_back(nc);
    mesh.element_measures_.push_back(area);

    for (const auto& bc : barycentric) {
      mesh.quad_weights_.push_back(area / 3.0);
      mesh.quad_points_.push_back(bc[0] * pa[0] + bc[1] * pb[0] + bc[2] * pc[0]);
      mesh.quad_points_.push_back(bc[0] * pa[1] + bc[1] * pb[1] + bc[2] * pc[1]);
      mesh.quad_basis_.push_back(bc[0]);
      mesh.quad_basis_.push_back(bc[1]);
      mesh.quad_basis_.push_back(bc[2]);
    }

    // grad phi_a = (yb - yc, xc - xb) / (2 area), and cyclic permutations.
    mesh.basis_gradients_.push_back((pb[1] - pc[1]) / twice_area);
    mesh.basis_gradients_.push_back((pc[0] - pb[0]) / twice_area);
    mesh.basis_gradients_.push_back((pc[1] - pa[1]) / twice_area);
    mesh.basis_gradients_.push_back((pa[0] - pc[0]) / twice_area);
    mesh.basis_gradients_.push_back((pa[1] - pb[1]) / twice_area);
    mesh.basis_gradients_.push_back((pb[0] - pa[0]) / twice_area);
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int bl = static_cast<int>(static_cast<std::size_t>(j) * cols) + i;
      int br = bl + 1;
      int tl = bl + static_cast<int>(cols);
      int tr = tl + 1;
      addTriangle(bl, br, tr);
      addTriangle(bl, tr, tl);
    }
  }

  mesh.total_measure_ = (x1 - x0) * (y1 - y0);
  mesh.lower_ = {x0, y0};
  mesh.upper_ = {x1, y1};
  return mesh;
}

DiscreteFunction::DiscreteFunction(const Mesh& mesh)
    : mesh_(&mesh), values_(mesh.node_count(), 0.0) {}

DiscreteFunction::DiscreteFunction(const Mesh& mesh,
                                   std::vector<double> nodal_values)
    : mesh_(&mesh), values_(std::move(nodal_values)) {
  if (values_.size() != mesh.node_count()) {
    throw std::invalid_argument(
        "nodal value count does not match the mesh node count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::domain_error("nodal values must be finite");
    }
  }
  for (std::size_t b : mesh.boundary_nodes()) {
    values_[b] = 0.0;
  }
}

DiscreteFunction DiscreteFunction::scaled(double factor) const {
  std::vector<double> scaled_values(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    scaled_values[i] = factor * values_[i];
  }
  return DiscreteFunction(*mesh_, std::move(scaled_values));
}

DiscreteFunction interpolate(const std::function<double(double, double)>& f,
                             const Mesh& mesh) {
  std::vector<double> values(mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    auto p = mesh.node(i);
    double v = f(p[0], p[1]);
    if (!std::isfinite(v)) {
      throw std::domain_error("interpolated function value is not finite");
    }
    values[i] = v;
  }
  return DiscreteFunction(mesh, std::move(values));
}

std::vector<double> element_gradients(const DiscreteFunction& u) {
  const Mesh& mesh = u.mesh();
  const int nv = mesh.nodes_per_element();
  std::vector<double> gradients(2 * mesh.element_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    double gx = 0.0;
    double gy = 0.0;
    for (int local = 0; local < nv; ++local) {
      double v = u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      auto g = mesh.basis_gradient(e, local);
      gx += v * g[0];
      gy += v * g[1];
    }
    gradients[2 * e] = gx;
    gradients[2 * e + 1] = gy;
  }
  return gradients;
}

std::vector<double> values_at_quadrature(const DiscreteFunction& u) {
  const Mesh& mesh = u.mesh();
  const int nv = mesh.nodes_per_element();
  const int nq = mesh.quadrature_per_element();
  std::vector<double> values(mesh.quadrature_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      std::size_t qp = e * static_cast<std::size_t>(nq) +
                       static_cast<std::size_t>(k);
      double v = 0.0;
      for (int local = 0; local < nv; ++local) {
        v += mesh.basis_value(qp, local) *
             u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      }
      values[qp] = v;
    }
  }
  return values;
}

std::vector<double> gradient_magnitude_at_quadrature(
    const DiscreteFunction& u) {
  const Mesh& mesh = u.mesh();
  const int nq = mesh.quadrature_per_element();
  std::vector<double> gradients = element_gradients(u);
  std::vector<double> magnitudes(mesh.quadrature_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    double m = std::hypot(gradients[2 * e], gradients[2 * e + 1]);
    for (int k = 0; k < nq; ++k) {
      magnitudes[e * static_cast<std::size_t>(nq) +
                 static_cast<std::size_t>(k)] = m;
    }
  }
  return magnitudes;
}

double integrate(const std::vector<double>& density, const Mesh& mesh) {
  if (density.size() != mesh.quadrature_count()) {
    throw std::invalid_argument(
        "density length does not match the quadrature point count");
  }
  double sum = 0.0;
  for (std::size_t qp = 0; qp < density.size(); ++qp) {
    sum += mesh.quadrature_weight(qp) * density[qp];
  }
  return sum;
}

void write_function_csv(const DiscreteFunction& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  const Mesh& mesh = u.mesh();
  out.precision(17);
  if (mesh.dimension() == 1) {
    out << "x,value\n";
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      out << mesh.node(i)[0] << ',' << u.value(i) << '\n';
    }
  } else {
    out << "x,y,value\n";
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      auto p = mesh.node(i);
      out << p[0] << ',' << p[1] << ',' << u.value(i) << '\n';
    }
  }
}

void write_mesh_csv(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out.precision(17);
  if (mesh.dimension() == 1) {
    out << "x\n";
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      out << mesh.node(i)[0] << '\n';
    }
  } else {
    out << "x,y\n";
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      auto p = mesh.node(i);
      out << p[0] << ',' << p[1] << '\n';
    }
  }
}

}  // namespace dpeigen
