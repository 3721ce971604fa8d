#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpeigen/exponent_field.hpp"
#include "dpeigen/mesh.hpp"

using namespace dpeigen;

namespace {

ExponentField constant_field(const Mesh& mesh, double value) {
  return ExponentField::from_values(
      mesh, std::vector<double>(mesh.quadrature_count(), value));
}

}  // namespace

TEST_SUITE("exponent_field") {

TEST_CASE("sampling an expression") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 16);
  ExponentField p = parse_exponent_expression("2 + 0.5*x", mesh);
  CHECK(p.values().size() == mesh.quadrature_count());
  for (std::size_t qp = 0; qp < p.values().size(); ++qp) {
    const auto pt = mesh.quadrature_point(qp);
    CHECK(p.value(qp) == doctest::Approx(2.0 + 0.5 * pt[0]).epsilon(1e-15));
  }
  // extrema are attained at quadrature samples (inner approximation)
  CHECK(p.min_value() > 2.0);
  CHECK(p.max_value() < 2.5);
  CHECK(p.extrema().first == p.min_value());
  CHECK(p.extrema().second == p.max_value());
  CHECK(p.source() == "2 + 0.5*x");
}

TEST_CASE("values at or below one are rejected") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  CHECK_THROWS_AS(parse_exponent_expression("1", mesh), std::domain_error);
  CHECK_THROWS_AS(parse_exponent_expression("0.5 + x", mesh),
                  std::domain_error);
  std::vector<double> bad(mesh.quadrature_count(), 2.0);
  bad[3] = 1.0;
  CHECK_THROWS_AS(ExponentField::from_values(mesh, bad), std::domain_error);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(ExponentField::from_values(mesh, bad), std::domain_error);
  CHECK_THROWS_AS(
      ExponentField::from_values(mesh, std::vector<double>(3, 2.0)),
      std::invalid_argument);
}

TEST_CASE("y is rejected on interval meshes") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  CHECK_THROWS_AS(parse_exponent_expression("2 + y", mesh),
                  std::domain_error);
  Mesh square = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3);
  ExponentField p = parse_exponent_expression("2 + y", square);
  CHECK(p.min_value() > 2.0);
}

TEST_CASE("conjugate exponent") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  ExponentField p = parse_exponent_expression("1.5 + x", mesh);
  ExponentField pc = conjugate_exponent(p);
  for (std::size_t qp = 0; qp < p.values().size(); ++qp) {
    CHECK(1.0 / p.value(qp) + 1.0 / pc.value(qp) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  ExponentField two = constant_field(mesh, 2.0);
  ExponentField twoc = conjugate_exponent(two);
  CHECK(twoc.min_value() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("valid triple passes validation") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 12);
  ExponentField p1 = parse_exponent_expression("2.8", mesh);
  ExponentField p2 = parse_exponent_expression("1.5", mesh);
  ExponentField q = parse_exponent_expression("2.0 + 0.05*x", mesh);
  ValidationReport report = validate_triple(p1, p2, q, mesh.dimension());
  CHECK(report.ok());
  CHECK(report.chain_ok);
  CHECK(report.subcritical_ok);
  CHECK(report.witness_points.empty());
  // 1D: the strong phase exceeds the dimension, which is reported as a note
  CHECK(!report.dimension_warnings.empty());
}

TEST_CASE("chain violations produce witnesses") {
  Mesh mesh = build_interval_mesh(0.0, 1.0, 12);
  ExponentField p1 = parse_exponent_expression("2.8", mesh);
  ExponentField p2 = parse_exponent_expression("2.1", mesh);
  ExponentField q = parse_exponent_expression("2.0", mesh);
  ValidationReport report = validate_triple(p1, p2, q, mesh.dimension());
  CHECK(!report.ok());
  CHECK(!report.chain_ok);
  REQUIRE(!report.witness_points.empty());
  const auto& w = report.witness_points.front();
  CHECK(w.x >= 0.0);
  CHECK(!w.condition.empty());
  CHECK(!describe_failure(report).empty());
}

TEST_CASE("subcritical bound in 2d") {
  Mesh mesh = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 4, 4);
  // p2 = 1.2 gives critical exponent 2*1.2/0.8 = 3
  ExponentField p2 = parse_exponent_expression("1.2", mesh);
  ExponentField ok_q = parse_exponent_expression("2.9", mesh);
  ExponentField ok_p1 = parse_exponent_expression("4.5", mesh);
  ValidationReport good = validate_triple(ok_p1, p2, ok_q, mesh.dimension());
  CHECK(good.subcritical_ok);
  CHECK(good.ok());

  ExponentField bad_q = parse_exponent_expression("3.1", mesh);
  ValidationReport bad = validate_triple(ok_p1, p2, bad_q, mesh.dimension());
  CHECK(!bad.subcritical_ok);
  CHECK(!bad.ok());
  CHECK(!bad.witness_points.empty());
}

TEST_CASE("triples from different meshes are rejected") {
  Mesh a = build_interval_mesh(0.0, 1.0, 8);
  Mesh b = build_interval_mesh(0.0, 1.0, 8);
  ExponentField p1 = parse_exponent_expression("2.8", a);
  ExponentField p2 = parse_exponent_expression("1.5", b);
  ExponentField q = parse_exponent_expression("2.0", a);
  CHECK_THROWS_AS(validate_triple(p1, p2, q, 1), std::invalid_argument);
}

}  // TEST_SUITE
