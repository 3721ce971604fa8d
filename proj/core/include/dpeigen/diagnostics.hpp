#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpeigen/energy.hpp"
#include "dpeigen/exponent_field.hpp"
#include "dpeigen/mesh.hpp"
#include "dpeigen/modular.hpp"

namespace dpeigen {

// One recorded violation: the failed relation evaluated as lhs <= rhs plus
// a short description of the input that produced it.
struct CheckWitness {
  std::string input;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Outcome of one check battery. A trial fails when any of its relations is
// violated; `worst_violation` is the largest slack-adjusted lhs - rhs seen
// across all relations of all trials, so it is <= 0 exactly when nothing
// failed. At most 16 witnesses are stored per report.
struct CheckReport {
  std::string check_name;
  int trials = 0;
  int failures = 0;
  double worst_violation = 0.0;
  std::vector<CheckWitness> details;

  bool ok() const noexcept { return trials > 0 && failures == 0; }
};

// Accumulates `part` into `into`: sums the counters, keeps the worst
// violation, and concatenates witnesses up to the storage cap.
void merge(CheckReport& into, const CheckReport& part);

// Deterministic smooth test function: a low-frequency random sine series
// vanishing on the boundary, rescaled so its largest nodal value equals
// `amplitude`. Requires amplitude > 0.
DiscreteFunction random_smooth_function(const Mesh& mesh, std::uint64_t seed,
                                        double amplitude = 1.0);

// Modular/norm consistency battery. Each trial draws a random smooth field,
// scales it so the norm lands alternately above and below one, and asserts
// the normalization identity, the power sandwiches on the matching side,
// norm homogeneity, and the unit-ball equivalence, all with 1e-9 relative
// slack. A strided subset of trials additionally runs the scale-family
// squeeze and the sequence test f_n = g / n whose modulars and norms must
// decrease to zero together.
CheckReport check_modular_norm_relations(int n_trials, const Mesh& mesh,
                                         const ExponentField& p,
                                         std::uint64_t rng_seed);

// Generalized Holder bound battery over random field pairs and scales.
CheckReport check_holder_inequality(int n_trials, const Mesh& mesh,
                                    const ExponentField& p,
                                    std::uint64_t rng_seed);

// Pairing identity battery: the first variations of the weighted energies
// paired with the function itself reproduce the raw energies to 1e-12
// relative accuracy.
CheckReport check_pairing_identities(int n_trials, const Mesh& mesh,
                                     const ExponentField& p1,
                                     const ExponentField& p2,
                                     const ExponentField& q,
                                     std::uint64_t rng_seed,
                                     double epsilon = kDefaultRegularization);

// The four-step comparison chain between the double-phase energies and the
// constant-exponent reference quantities, for one function u (the zero
// function passes with equalities):
//   (i)  pointwise 2(a^p1 + a^p2) >= a^{max q} + a^{min q} for the sampled
//        magnitudes of both u and grad u,
//   (ii) int (|u|^{max q} + |u|^{min q}) >= int |u|^q,
//   (iii) (max p1) * dirichlet >= dirichlet_raw,
//   (iv) dirichlet_raw >= (mu_hat / 2) * mass_raw,
// where mu_hat is the smaller of the two constant-exponent reference
// eigenvalues for min q and max q. Step (iv) carries `slack` to absorb the
// discretization error of mu_hat; the algebraic steps use rounding slack
// only.
CheckReport check_inequality_chain(const DiscreteFunction& u,
                                   const ExponentField& p1,
                                   const ExponentField& p2,
                                   const ExponentField& q, double mu_hat,
                                   double slack = 0.02);

// Convenience overload that computes mu_hat internally from the classical
// reference eigenvalues at min q and max q (one solver run each; prefer the
// explicit overload when checking many functions).
CheckReport check_inequality_chain(const DiscreteFunction& u,
                                   const ExponentField& p1,
                                   const ExponentField& p2,
                                   const ExponentField& q);

// Batch version of the chain check over random smooth functions.
CheckReport check_inequality_chain_battery(int n_trials, const Mesh& mesh,
                                           const ExponentField& p1,
                                           const ExponentField& p2,
                                           const ExponentField& q,
                                           double mu_hat,
                                           std::uint64_t rng_seed);

// Energies of the scaled copies t * u along a ray. Under the exponent chain
// the weighted quotient blows up at both ends of the ray, which the profile
// makes observable. Requires u not identically zero and a strictly
// ascending positive grid.
struct RayProfile {
  std::vector<double> t;
  std::vector<double> dirichlet;
  std::vector<double> mass;
  std::vector<double> quotient;  // dirichlet / mass, +inf where mass is 0
  std::size_t argmin = 0;        // index of the smallest quotient
};

RayProfile ray_limit_profile(const DiscreteFunction& u,
                             const std::vector<double>& t_grid,
                             const ExponentField& p1,
                             const ExponentField& p2, const ExponentField& q);

// Single-function finite-difference probe of every analytic gradient
// assembly against the exact energies, using a five-point central stencil on
// single-node perturbations. Nodes whose adjacent element gradients fall
// below kink_floor * max |grad u| are skipped: there the energy density of
// the weaker exponent has a curvature spike inside the stencil and the
// comparison would measure stencil error, not assembly error. (For the zero
// function the floor vanishes, every node is sampled, and the symmetric
// stencil cancels exactly.)
struct GradientCheckOptions {
  int sample_nodes = 12;
  double step = 1e-6;
  double relative_tolerance = 1e-5;
  double absolute_tolerance = 1e-8;
  double kink_floor = 1e-2;
  double lambda = 2.0;
  double epsilon = kDefaultRegularization;
  std::uint64_t seed = 2026;
};

struct GradientCheckReport {
  int nodes_sampled = 0;
  int nodes_skipped = 0;
  int checks_run = 0;
  int checks_passed = 0;
  double max_absolute_error = 0.0;
  // Largest error-to-threshold ratio seen; values <= 1 pass.
  double worst_ratio = 0.0;
  std::vector<CheckWitness> failures;

  bool ok() const noexcept { return checks_run > 0 && failures.empty(); }
};

GradientCheckReport probe_gradients(const DiscreteFunction& u,
                                    const ExponentField& p1,
                                    const ExponentField& p2,
                                    const ExponentField& q,
                                    const GradientCheckOptions& options = {});

// Battery form of the probe over random smooth functions at unit amplitude.
CheckReport check_gradients(int n_trials, const Mesh& mesh,
                            const ExponentField& p1, const ExponentField& p2,
                            const ExponentField& q, std::uint64_t rng_seed);

}  // namespace dpeigen
