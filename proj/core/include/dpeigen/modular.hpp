#pragma once

#include <cstddef>
#include <vector>

#include "dpeigen/exponent_field.hpp"
#include "dpeigen/mesh.hpp"

namespace dpeigen {

// A scalar quantity sampled at every quadrature point of a mesh, in mesh
// enumeration order. Values must be finite.
class ScalarField {
public:
  ScalarField(const Mesh& mesh, std::vector<double> values);
  static ScalarField constant(const Mesh& mesh, double value);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double value(std::size_t qp) const { return values_[qp]; }

private:
  const Mesh* mesh_;
  std::vector<double> values_;
};

// |u| sampled at the quadrature points.
ScalarField absolute_values(const DiscreteFunction& u);
// |grad u| sampled at the quadrature points (constant per element).
ScalarField gradient_magnitude(const DiscreteFunction& u);

// The modular: integral of |f|^p(x) under the mesh quadrature. Throws
// std::invalid_argument if f and p live on different meshes.
double modular(const ScalarField& f, const ExponentField& p);

// The Luxemburg norm: the unique mu > 0 with modular(f / mu) = 1, found by
// geometric bracketing plus bisection to absolute tolerance 1e-12 (0 for the
// zero field). Throws std::runtime_error if bracketing fails to converge,
// which signals a pathological field.
double luxemburg_norm(const ScalarField& f, const ExponentField& p);

// Norm of the gradient: luxemburg_norm(|grad u|, p). This is the natural
// norm for zero-boundary functions, where the gradient controls the function.
double sobolev_norm(const DiscreteFunction& u, const ExponentField& p);

// Both sides of the generalized Holder inequality
//   |integral u v| <= (1/min p + 1/min p') |u|_p |v|_p'
// with p' the pointwise conjugate exponent. The contract lhs <= rhs holds
// for the quadrature measure up to norm-bisection tolerance.
struct HolderBound {
  double lhs;
  double rhs;
};
HolderBound holder_bound(const ScalarField& u, const ScalarField& v,
                         const ExponentField& p);

}  // namespace dpeigen
