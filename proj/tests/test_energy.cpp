#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpeigen/energy.hpp"
#include "dpeigen/mesh.hpp"

using namespace dpeigen;

namespace {

constexpr double kPi = 3.14159265358979323846;

ExponentField constant_field(const Mesh& mesh, double value) {
  return ExponentField::from_values(
      mesh, std::vector<double>(mesh.quadrature_count(), value));
}

ExponentField linear_field(const Mesh& mesh, double base, double slope) {
  std::vector<double> values(mesh.quadrature_count());
  for (std::size_t qp = 0; qp < values.size(); ++qp) {
    values[qp] = base + slope * mesh.quadrature_point(qp)[0];
  }
  return ExponentField::from_values(mesh, std::move(values));
}

double pair(const GradientVector& g, const std::vector<double>& v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g[i] * v[i];
  return sum;
}

double pair(const GradientVector& g, const DiscreteFunction& u) {
  return pair(g, u.nodal_values());
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("sine interpolant reproduces the classical integrals") {
  Mesh mesh = build_interval_mesh(0.0, kPi, 200);
  DiscreteFunction u = interpolate(
      [](double x, double) { return std::sin(x); }, mesh);
  ExponentField two = constant_field(mesh, 2.0);
  EnergyBreakdown e = energy_breakdown(u, two, two, two);

  // both gradient terms coincide, so the weighted energy doubles (1/2)|u'|^2
  CHECK(e.dirichlet == doctest::Approx(kPi / 2.0).epsilon(1e-3));
  CHECK(e.mass == doctest::Approx(kPi / 4.0).epsilon(1e-3));
  CHECK(e.dirichlet_raw == doctest::Approx(kPi).epsilon(1e-3));
  CHECK(e.mass_raw == doctest::Approx(kPi / 2.0).epsilon(1e-3));
  CHECK(e.rayleigh == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(e.rayleigh_raw == doctest::Approx(2.0).epsilon(1e-3));

  LambdaEnergy t = lambda_energy(u, 3.0, two, two, two);
  CHECK(t.value == doctest::Approx(-kPi / 4.0).epsilon(5e-3));
  CHECK(t.value < 0.0);
}

TEST_CASE("hat function energies are exact") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
  std::vector<double> nodal(mesh.node_count(), 0.0);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!mesh.is_boundary_node(i)) nodal[i] = 1.0;
  }
  DiscreteFunction u(mesh, nodal);

  ExponentField p1 = constant_field(mesh, 3.0);
  ExponentField p2 = constant_field(mesh, 1.5);
  ExponentField q = constant_field(mesh, 2.0);
  EnergyBreakdown e = energy_breakdown(u, p1, p2, q);

  // |grad u| = 2 on both elements of total measure one
  const double d1 = 8.0 / 3.0;                      // (1/3) 2^3
  const double d2 = std::pow(2.0, 1.5) / 1.5;       // (1/1.5) 2^1.5
  CHECK(e.dirichlet == doctest::Approx(d1 + d2).epsilon(1e-14));
  CHECK(e.dirichlet_raw ==
        doctest::Approx(8.0 + std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK(e.mass == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(e.mass_raw == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(e.rayleigh == doctest::Approx((d1 + d2) * 6.0).epsilon(1e-14));
}

TEST_CASE("pairing the first variations with u gives the raw integrals") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 40);
  ExponentField p1 = linear_field(mesh, 2.8, 0.1);
  ExponentField p2 = linear_field(mesh, 1.5, 0.05);
  ExponentField q = linear_field(mesh, 2.0, 0.1);
  DiscreteFunction u = interpolate(
      [](double x, double) { return std::sin(3.0 * x) * x * (1.0 - x); },
      mesh);
  EnergyBreakdown e = energy_breakdown(u, p1, p2, q);

  const double dpair = pair(dirichlet_gradient(u, p1, p2), u);
  CHECK(dpair == doctest::Approx(e.dirichlet_raw).epsilon(1e-12));
  const double mpair = pair(mass_gradient(u, q), u);
  CHECK(mpair == doctest::Approx(e.mass_raw).epsilon(1e-12));

  // the raw variations carry the pointwise exponents as factors
  std::vector<double> uq = values_at_quadrature(u);
  std::vector<double> gm = element_gradients(u);
  std::vector<double> qd(mesh.quadrature_count());
  std::vector<double> dd(mesh.quadrature_count());
  for (std::size_t qp = 0; qp < qd.size(); ++qp) {
    const std::size_t e_idx =
        qp / static_cast<std::size_t>(mesh.quadrature_per_element());
    const double g = std::abs(gm[2 * e_idx]);
    qd[qp] = q.value(qp) * std::pow(std::abs(uq[qp]), q.value(qp));
    dd[qp] = p1.value(qp) * std::pow(g, p1.value(qp)) +
             p2.value(qp) * std::pow(g, p2.value(qp));
  }
  CHECK(pair(mass_raw_gradient(u, q), u) ==
        doctest::Approx(integrate(qd, mesh)).epsilon(1e-10));
  CHECK(pair(dirichlet_raw_gradient(u, p1, p2), u) ==
        doctest::Approx(integrate(dd, mesh)).epsilon(1e-10));
}

TEST_CASE("first variations vanish at constrained nodes") {
  Mesh mesh = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 5, 5);
  ExponentField p1 = constant_field(mesh, 2.6);
  ExponentField p2 = constant_field(mesh, 1.4);
  ExponentField q = constant_field(mesh, 2.0);
  DiscreteFunction u = interpolate(
      [](double x, double y) {
        return std::sin(kPi * x) * std::sin(kPi * y);
      },
      mesh);

  GradientVector dg = dirichlet_gradient(u, p1, p2);
  GradientVector mg = mass_gradient(u, q);
  GradientVector t = lambda_energy(u, 5.0, p1, p2, q).gradient;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!mesh.is_boundary_node(i)) continue;
    CHECK(dg[i] == 0.0);
    CHECK(mg[i] == 0.0);
    CHECK(t[i] == 0.0);
  }
}

TEST_CASE("finite differences confirm the first variations") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 24);
  ExponentField p1 = linear_field(mesh, 2.7, 0.2);
  ExponentField p2 = linear_field(mesh, 1.6, 0.1);
  ExponentField q = linear_field(mesh, 2.1, 0.05);
  DiscreteFunction u = interpolate(
      [](double x, double) { return x * (1.0 - x) * (2.0 + std::sin(4.0 * x)); },
      mesh);

  std::vector<double> dir(mesh.node_count(), 0.0);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!mesh.is_boundary_node(i)) {
      dir[i] = std::cos(7.0 * static_cast<double>(i)) + 0.3;
    }
  }

  const double h = 1e-6;
  auto shifted = [&](double step) {
    std::vector<double> v = u.nodal_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += step * dir[i];
    return DiscreteFunction(mesh, std::move(v));
  };
  EnergyBreakdown plus = energy_breakdown(shifted(h), p1, p2, q);
  EnergyBreakdown minus = energy_breakdown(shifted(-h), p1, p2, q);

  const double d_fd = (plus.dirichlet - minus.dirichlet) / (2.0 * h);
  const double m_fd = (plus.mass - minus.mass) / (2.0 * h);
  CHECK(pair(dirichlet_gradient(u, p1, p2), dir) ==
        doctest::Approx(d_fd).epsilon(1e-6));
  CHECK(pair(mass_gradient(u, q), dir) == doctest::Approx(m_fd).epsilon(1e-6));

  const double lambda = 4.0;
  LambdaEnergy t = lambda_energy(u, lambda, p1, p2, q);
  CHECK(t.value == doctest::Approx(plus.dirichlet - lambda * plus.mass)
                       .epsilon(1e-4));
  CHECK(pair(t.gradient, dir) ==
        doctest::Approx(d_fd - lambda * m_fd).epsilon(1e-6));
}

TEST_CASE("weak residual is the norm of the defect") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 30);
  ExponentField p1 = constant_field(mesh, 2.8);
  ExponentField p2 = constant_field(mesh, 1.5);
  ExponentField q = constant_field(mesh, 2.0);
  DiscreteFunction u = interpolate(
      [](double x, double) { return x * (1.0 - x); }, mesh);

  const double lambda = 11.0;
  GradientVector dg = dirichlet_gradient(u, p1, p2);
  GradientVector mg = mass_gradient(u, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < dg.size(); ++i) {
    const double d = dg[i] - lambda * mg[i];
    sum += d * d;
  }
  CHECK(weak_residual(u, lambda, p1, p2, q) ==
        doctest::Approx(std::sqrt(sum)).epsilon(1e-13));
}

TEST_CASE("lambda energy rejects nonpositive lambda") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  ExponentField p1 = constant_field(mesh, 2.8);
  ExponentField p2 = constant_field(mesh, 1.5);
  ExponentField q = constant_field(mesh, 2.0);
  DiscreteFunction u = interpolate(
      [](double x, double) { return x * (1.0 - x); }, mesh);
  CHECK_THROWS_AS(lambda_energy(u, 0.0, p1, p2, q), std::invalid_argument);
  CHECK_THROWS_AS(lambda_energy(u, -1.0, p1, p2, q), std::invalid_argument);
}

TEST_CASE("zero function has zero energies and infinite quotients") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  ExponentField p1 = constant_field(mesh, 2.8);
  ExponentField p2 = constant_field(mesh, 1.5);
  ExponentField q = constant_field(mesh, 2.0);
  DiscreteFunction zero(mesh, std::vector<double>(mesh.node_count(), 0.0));
  EnergyBreakdown e = energy_breakdown(zero, p1, p2, q);
  CHECK(e.dirichlet == 0.0);
  CHECK(e.mass == 0.0);
  CHECK(std::isinf(e.rayleigh));
  CHECK(std::isinf(e.rayleigh_raw));
}

}  // TEST_SUITE
