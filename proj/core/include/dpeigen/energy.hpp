#pragma once

#include <vector>

#include "dpeigen/exponent_field.hpp"
#include "dpeigen/mesh.hpp"

namespace dpeigen {

// Regularization for the degenerate/singular weights |g|^(p-2): gradients
// use (|g|^2 + epsilon^2)^((p-2)/2) so that p < 2 stays finite at g = 0.
// Energies are never regularized.
inline constexpr double kDefaultRegularization = 1e-10;

// Nodal coefficients of a first variation, one entry per mesh node. Entries
// at constrained (boundary) nodes are identically zero.
using GradientVector = std::vector<double>;

// All four energy integrals of the double-phase problem for one function,
// evaluated in a single quadrature sweep:
//   dirichlet      = int (1/p1)|grad u|^p1 + int (1/p2)|grad u|^p2
//   mass           = int (1/q)|u|^q
//   dirichlet_raw  = int |grad u|^p1 + int |grad u|^p2
//   mass_raw       = int |u|^q
// The raw integrals are the pairings of the respective first variations with
// u itself. Invariants (from the pointwise bounds on the weights):
//   dirichlet_raw / max p1 <= dirichlet <= dirichlet_raw / min p2
//   mass_raw / max q       <= mass      <= mass_raw / min q
// The quotients carry +infinity as the marker when their denominator is 0.
struct EnergyBreakdown {
  double dirichlet = 0.0;
  double mass = 0.0;
  double dirichlet_raw = 0.0;
  double mass_raw = 0.0;
  double rayleigh = 0.0;      // dirichlet / mass
  double rayleigh_raw = 0.0;  // dirichlet_raw / mass_raw
};

EnergyBreakdown energy_breakdown(const DiscreteFunction& u,
                                 const ExponentField& p1,
                                 const ExponentField& p2,
                                 const ExponentField& q);

// First variation of the dirichlet energy: the nodal coefficients of
//   v -> int (|grad u|^{p1-2} + |grad u|^{p2-2}) grad u . grad v.
// Pairing with u reproduces dirichlet_raw up to O(epsilon^2).
GradientVector dirichlet_gradient(const DiscreteFunction& u,
                                  const ExponentField& p1,
                                  const ExponentField& p2,
                                  double epsilon = kDefaultRegularization);

// First variation of the mass energy: v -> int |u|^{q-2} u v. Pairing with
// u reproduces mass_raw up to O(epsilon^2).
GradientVector mass_gradient(const DiscreteFunction& u, const ExponentField& q,
                             double epsilon = kDefaultRegularization);

// First variation of dirichlet_raw: carries pointwise factors p1(x), p2(x).
GradientVector dirichlet_raw_gradient(const DiscreteFunction& u,
                                      const ExponentField& p1,
                                      const ExponentField& p2,
                                      double epsilon = kDefaultRegularization);

// First variation of mass_raw: carries the pointwise factor q(x).
GradientVector mass_raw_gradient(const DiscreteFunction& u,
                                 const ExponentField& q,
                                 double epsilon = kDefaultRegularization);

// The lambda-energy dirichlet - lambda * mass, whose minimizers below zero
// certify lambda as an eigenvalue, together with its first variation.
// Requires lambda > 0.
struct LambdaEnergy {
  double value = 0.0;
  GradientVector gradient;
};
LambdaEnergy lambda_energy(const DiscreteFunction& u, double lambda,
                           const ExponentField& p1, const ExponentField& p2,
                           const ExponentField& q,
                           double epsilon = kDefaultRegularization);

// Euclidean norm over interior nodes of the weak-form defect
//   dirichlet_gradient(u) - lambda * mass_gradient(u);
// zero (up to solver tolerance) exactly at discrete weak solutions.
double weak_residual(const DiscreteFunction& u, double lambda,
                     const ExponentField& p1, const ExponentField& p2,
                     const ExponentField& q,
                     double epsilon = kDefaultRegularization);

}  // namespace dpeigen
