#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dpeigen/mesh.hpp"

namespace dpeigen {

// A variable exponent sampled at every quadrature point of a mesh, in mesh
// enumeration order. Every sample must be finite and strictly greater than 1;
// construction rejects anything else. The sampled extrema are cached and act
// as an inner approximation of the true infimum/supremum of the underlying
// function.
class ExponentField {
public:
  static ExponentField from_values(const Mesh& mesh,
                                   std::vector<double> values,
                                   std::string source = "array");

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double value(std::size_t qp) const { return values_[qp]; }

  // (minimum, maximum) over the quadrature samples.
  std::pair<double, double> extrema() const noexcept {
    return {min_value_, max_value_};
  }
  double min_value() const noexcept { return min_value_; }
  double max_value() const noexcept { return max_value_; }

  // Where the field came from: expression text, "array", or a file path.
  const std::string& source() const noexcept { return source_; }

private:
  ExponentField(const Mesh& mesh, std::vector<double> values,
                std::string source);

  const Mesh* mesh_;
  std::vector<double> values_;
  double min_value_;
  double max_value_;
  std::string source_;
};

// Parses an expression (see Expression for the grammar) and samples it at
// every quadrature point. Throws ParseError on malformed text and
// std::domain_error if any sampled value is non-finite or <= 1; the error
// message names the first offending sample point.
ExponentField parse_exponent_expression(const std::string& expression,
                                        const Mesh& mesh);

// Loads one whitespace-separated value per quadrature point from a plain
// text file, mesh enumeration order. The count must match exactly.
ExponentField load_exponent_field(const std::string& path, const Mesh& mesh);

// Pointwise Holder conjugate p / (p - 1). Values stay > 1 because p > 1.
ExponentField conjugate_exponent(const ExponentField& p);

// Outcome of checking an exponent triple against the structural assumptions
// of the double-phase problem.
struct ValidationReport {
  // Pointwise ordering 1 < p2(x) < min q <= max q < p1(x) at every
  // quadrature point.
  bool chain_ok = false;
  // max q < N * p2(x) / (N - p2(x)) wherever p2(x) < N; automatically
  // satisfied (and noted in dimension_warnings) where p2(x) >= N.
  bool subcritical_ok = false;
  std::vector<std::string> dimension_warnings;

  struct Witness {
    std::size_t quadrature_point;
    double x;
    double y;
    std::string condition;  // the violated condition, human readable
  };
  std::vector<Witness> witness_points;

  bool ok() const noexcept { return chain_ok && subcritical_ok; }
};

// Checks the exponent chain and the subcriticality bound for the ambient
// dimension (the mesh dimension in every run this library produces; ambient
// dimensions below 3 are flagged as warnings, not failures). All three
// fields must be sampled on the same mesh.
ValidationReport validate_triple(const ExponentField& p1,
                                 const ExponentField& p2,
                                 const ExponentField& q,
                                 int ambient_dimension);

// One-line rendering of a failed report, for error messages.
std::string describe_failure(const ValidationReport& report);

}  // namespace dpeigen
