#include "dpeigen/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "deterministic_rng.hpp"
#include "dpeigen/solver.hpp"

namespace dpeigen {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxWitnesses = 16;
constexpr double kRelationSlack = 1e-9;

// Collects the relations of one report. Relations are stated as
// lhs <= rhs; the violation is lhs - rhs after adding `slack * max(1, |rhs|)`
// to the right-hand side, so positives are genuine failures.
class Battery {
public:
  explicit Battery(std::string name) { report_.check_name = std::move(name); }

  void begin_trial() {
    ++report_.trials;
    trial_failed_ = false;
  }

  // Returns true when the relation holds.
  bool require_le(double lhs, double rhs, double slack,
                  const std::string& input) {
    const double violation =
        lhs - (rhs + slack * std::max(1.0, std::abs(rhs)));
    report_.worst_violation =
        std::max(report_.worst_violation, violation);
    if (violation <= 0.0) return true;
    if (!trial_failed_) {
      trial_failed_ = true;
      ++report_.failures;
    }
    if (report_.details.size() < kMaxWitnesses) {
      report_.details.push_back({input, lhs, rhs});
    }
    return false;
  }

  bool require_close(double value, double target, double slack,
                     const std::string& input) {
    return require_le(std::abs(value - target), 0.0, slack, input);
  }

  CheckReport take() {
    if (report_.trials == 0) {
      report_.worst_violation = 0.0;
    }
    return std::move(report_);
  }

private:
  CheckReport report_;
  bool trial_failed_ = false;
};

std::string describe(const char* relation, int trial, double extra = 0.0,
                     const char* extra_name = nullptr) {
  std::ostringstream oss;
  oss.precision(17);
  oss << relation << " (trial " << trial;
  if (extra_name != nullptr) {
    oss << ", " << extra_name << " = " << extra;
  }
  oss << ")";
  return oss.str();
}

ScalarField scaled_field(const ScalarField& f, double factor) {
  std::vector<double> values = f.values();
  for (double& v : values) v *= factor;
  return ScalarField(f.mesh(), std::move(values));
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

ScalarField field_of(const DiscreteFunction& u) {
  return ScalarField(u.mesh(), values_at_quadrature(u));
}

}  // namespace

void merge(CheckReport& into, const CheckReport& part) {
  if (into.trials == 0 && into.check_name.empty()) {
    into.check_name = part.check_name;
  }
  into.trials += part.trials;
  into.failures += part.failures;
  if (part.trials > 0) {
    into.worst_violation =
        into.trials == part.trials
            ? part.worst_violation
            : std::max(into.worst_violation, part.worst_violation);
  }
  for (const CheckWitness& w : part.details) {
    if (into.details.size() >= kMaxWitnesses) break;
    into.details.push_back(w);
  }
}

DiscreteFunction random_smooth_function(const Mesh& mesh, std::uint64_t seed,
                                        double amplitude) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("amplitude must be positive");
  }
  detail::DeterministicRng rng(detail::mix_seed(seed, 0x500437ULL));
  const auto lo = mesh.lower_corner();
  const auto hi = mesh.upper_corner();
  const double width_x = hi[0] - lo[0];
  const double width_y = mesh.dimension() == 2 ? hi[1] - lo[1] : 1.0;
  DiscreteFunction result(mesh);
  if (mesh.dimension() == 1) {
    const int modes = 4;
    std::vector<double> coeff(static_cast<std::size_t>(modes));
    for (double& c : coeff) c = rng.uniform_signed();
    result = interpolate(
        [&](double x, double) {
          const double xi = (x - lo[0]) / width_x;
          double v = 0.0;
          for (int k = 0; k < modes; ++k) {
            v += coeff[static_cast<std::size_t>(k)] *
                 std::sin((k + 1) * kPi * xi);
          }
          return v;
        },
        mesh);
  } else {
    const int modes = 3;
    std::vector<double> coeff(static_cast<std::size_t>(modes * modes));
    for (double& c : coeff) c = rng.uniform_signed();
    result = interpolate(
        [&](double x, double y) {
          const double xi = (x - lo[0]) / width_x;
          const double eta = (y - lo[1]) / width_y;
          double v = 0.0;
          for (int k = 0; k < modes; ++k) {
            for (int l = 0; l < modes; ++l) {
              v += coeff[static_cast<std::size_t>(k * modes + l)] *
                   std::sin((k + 1) * kPi * xi) *
                   std::sin((l + 1) * kPi * eta);
            }
          }
          return v;
        },
        mesh);
  }
  const double mx = max_abs(result.nodal_values());
  if (mx == 0.0) {
    throw std::runtime_error("random profile degenerated to zero");
  }
  return result.scaled(amplitude / mx);
}

CheckReport check_modular_norm_relations(int n_trials, const Mesh& mesh,
                                         const ExponentField& p,
                                         std::uint64_t rng_seed) {
  if (n_trials < 1) {
    throw std::invalid_argument("n_trials must be at least 1");
  }
  Battery battery("modular_norm_relations");
  const double p_min = p.min_value();
  const double p_max = p.max_value();
  const int stride = std::max(1, n_trials / 25);
  for (int trial = 0; trial < n_trials; ++trial) {
    battery.begin_trial();
    detail::DeterministicRng rng(
        detail::mix_seed(rng_seed, 0x40d0ULL, static_cast<std::uint64_t>(trial)));
    const DiscreteFunction u = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xf1e1dULL,
                               static_cast<std::uint64_t>(trial)));
    const ScalarField f = field_of(u);
    const double mu_raw = luxemburg_norm(f, p);
    if (mu_raw == 0.0) continue;
    // Alternate targets on both sides of norm one.
    const double target = trial % 2 == 0 ? std::pow(10.0, rng.uniform_in(0.05, 1.3))
                                         : std::pow(10.0, rng.uniform_in(-1.3, -0.05));
    const ScalarField g = scaled_field(f, target / mu_raw);
    const double mu = luxemburg_norm(g, p);
    const double rho = modular(g, p);

    battery.require_close(mu, target, kRelationSlack,
                          describe("norm homogeneity", trial, target,
                                   "target norm"));
    battery.require_close(modular(scaled_field(g, 1.0 / mu), p), 1.0,
                          kRelationSlack,
                          describe("unit normalization", trial, mu, "norm"));

    if (mu > 1.0 + kRelationSlack) {
      battery.require_le(std::pow(mu, p_min), rho, kRelationSlack,
                         describe("sandwich lower bound above one", trial,
                                  mu, "norm"));
      battery.require_le(rho, std::pow(mu, p_max), kRelationSlack,
                         describe("sandwich upper bound above one", trial,
                                  mu, "norm"));
      battery.require_le(mu, rho, kRelationSlack,
                         describe("modular dominates norm above one", trial,
                                  mu, "norm"));
      battery.require_le(1.0, rho, kRelationSlack,
                         describe("unit ball complement", trial, mu, "norm"));
    } else if (mu < 1.0 - kRelationSlack) {
      battery.require_le(std::pow(mu, p_max), rho, kRelationSlack,
                         describe("sandwich lower bound below one", trial,
                                  mu, "norm"));
      battery.require_le(rho, std::pow(mu, p_min), kRelationSlack,
                         describe("sandwich upper bound below one", trial,
                                  mu, "norm"));
      battery.require_le(rho, mu, kRelationSlack,
                         describe("norm dominates modular below one", trial,
                                  mu, "norm"));
      battery.require_le(rho, 1.0, kRelationSlack,
                         describe("unit ball inclusion", trial, mu, "norm"));
    }

    if (trial % stride == 0) {
      // Scale family straddling norm one: homogeneity plus the two-sided
      // squeeze that forces the modular to zero with the norm.
      static constexpr double kScaleTargets[] = {4.0, 2.0, 1.0, 0.5, 0.25, 0.1};
      double previous = kInfinity;
      for (const double s : kScaleTargets) {
        const ScalarField h = scaled_field(g, s / mu);
        const double norm_h = luxemburg_norm(h, p);
        const double rho_h = modular(h, p);
        battery.require_close(norm_h, s, kRelationSlack,
                              describe("scale family homogeneity", trial, s,
                                       "target norm"));
        if (s <= 1.0 - kRelationSlack) {
          battery.require_le(rho_h, s, kRelationSlack,
                             describe("squeeze upper bound", trial, s,
                                      "target norm"));
          battery.require_le(std::pow(s, p_max), rho_h, kRelationSlack,
                             describe("squeeze lower bound", trial, s,
                                      "target norm"));
        }
        battery.require_le(rho_h, previous, kRelationSlack,
                           describe("modular monotone in scale", trial, s,
                                    "target norm"));
        previous = rho_h;
      }
      // Sequence test f_n = g / n: modular and norm decrease to zero
      // together.
      double prev_norm = kInfinity;
      double prev_rho = kInfinity;
      for (int n = 1; n <= 8; ++n) {
        const ScalarField h = scaled_field(g, 1.0 / n);
        const double norm_h = luxemburg_norm(h, p);
        const double rho_h = modular(h, p);
        battery.require_le(norm_h, prev_norm, kRelationSlack,
                           describe("sequence norm decreasing", trial,
                                    static_cast<double>(n), "n"));
        battery.require_le(rho_h, prev_rho, kRelationSlack,
                           describe("sequence modular decreasing", trial,
                                    static_cast<double>(n), "n"));
        prev_norm = norm_h;
        prev_rho = rho_h;
      }
      battery.require_le(modular(scaled_field(g, 1.0 / (8.0 * mu)), p),
                         std::pow(1.0 / 8.0, p_min), kRelationSlack,
                         describe("sequence tail squeeze", trial, 0.125,
                                  "tail norm"));
    }
  }
  return battery.take();
}

CheckReport check_holder_inequality(int n_trials, const Mesh& mesh,
                                    const ExponentField& p,
                                    std::uint64_t rng_seed) {
  if (n_trials < 1) {
    throw std::invalid_argument("n_trials must be at least 1");
  }
  Battery battery("holder_inequality");
  for (int trial = 0; trial < n_trials; ++trial) {
    battery.begin_trial();
    detail::DeterministicRng rng(
        detail::mix_seed(rng_seed, 0x401de2ULL,
                         static_cast<std::uint64_t>(trial)));
    const double amp_u = std::pow(10.0, rng.uniform_in(-1.0, 1.0));
    const double amp_v = std::pow(10.0, rng.uniform_in(-1.0, 1.0));
    const DiscreteFunction u = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xaaULL,
                               static_cast<std::uint64_t>(trial)),
        amp_u);
    const DiscreteFunction v = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xbbULL,
                               static_cast<std::uint64_t>(trial)),
        amp_v);
    const HolderBound hb = holder_bound(field_of(u), field_of(v), p);
    battery.require_le(hb.lhs, hb.rhs, kRelationSlack,
                       describe("holder bound", trial, amp_u * amp_v,
                                "amplitude product"));
  }
  return battery.take();
}

CheckReport check_pairing_identities(int n_trials, const Mesh& mesh,
                                     const ExponentField& p1,
                                     const ExponentField& p2,
                                     const ExponentField& q,
                                     std::uint64_t rng_seed, double epsilon) {
  if (n_trials < 1) {
    throw std::invalid_argument("n_trials must be at least 1");
  }
  Battery battery("pairing_identities");
  for (int trial = 0; trial < n_trials; ++trial) {
    battery.begin_trial();
    detail::DeterministicRng rng(
        detail::mix_seed(rng_seed, 0x9a129ULL,
                         static_cast<std::uint64_t>(trial)));
    const double amplitude = std::pow(10.0, rng.uniform_in(-0.5, 0.5));
    const DiscreteFunction u = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xccULL,
                               static_cast<std::uint64_t>(trial)),
        amplitude);
    const EnergyBreakdown eb = energy_breakdown(u, p1, p2, q);
    const GradientVector gd = dirichlet_gradient(u, p1, p2, epsilon);
    const GradientVector gm = mass_gradient(u, q, epsilon);
    double pair_d = 0.0;
    double pair_m = 0.0;
    for (std::size_t i = 0; i < gd.size(); ++i) {
      pair_d += gd[i] * u.value(i);
      pair_m += gm[i] * u.value(i);
    }
    battery.require_le(std::abs(pair_d - eb.dirichlet_raw),
                       1e-12 * std::max(1.0, std::abs(eb.dirichlet_raw)), 0.0,
                       describe("dirichlet pairing identity", trial,
                                amplitude, "amplitude"));
    battery.require_le(std::abs(pair_m - eb.mass_raw),
                       1e-12 * std::max(1.0, std::abs(eb.mass_raw)), 0.0,
                       describe("mass pairing identity", trial, amplitude,
                                "amplitude"));
  }
  return battery.take();
}

CheckReport check_inequality_chain(const DiscreteFunction& u,
                                   const ExponentField& p1,
                                   const ExponentField& p2,
                                   const ExponentField& q, double mu_hat,
                                   double slack) {
  if (!(mu_hat > 0.0) || !std::isfinite(mu_hat)) {
    throw std::invalid_argument("reference eigenvalue must be positive");
  }
  if (!(slack >= 0.0) || !(slack < 1.0)) {
    throw std::invalid_argument("slack must lie in [0, 1)");
  }
  Battery battery("inequality_chain");
  const Mesh& mesh = u.mesh();
  const double q_min = q.min_value();
  const double q_max = q.max_value();
  const std::vector<double> gm = gradient_magnitude_at_quadrature(u);
  std::vector<double> av = values_at_quadrature(u);
  for (double& v : av) v = std::abs(v);

  // (i) pointwise domination of the split-exponent pair, probed with both
  // sample families the chain is applied to.
  const std::vector<double>* families[] = {&av, &gm};
  const char* family_names[] = {"function values", "gradient magnitudes"};
  for (int fam = 0; fam < 2; ++fam) {
    battery.begin_trial();
    double worst_lhs = -kInfinity;
    double worst_rhs = 0.0;
    for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
      const double a = (*families[fam])[qp];
      const double rhs = 2.0 * (std::pow(a, p1.value(qp)) +
                                std::pow(a, p2.value(qp)));
      const double lhs = std::pow(a, q_max) + std::pow(a, q_min);
      if (lhs - rhs > worst_lhs - worst_rhs) {
        worst_lhs = lhs;
        worst_rhs = rhs;
      }
    }
    std::ostringstream input;
    input << "pointwise split-exponent domination over " << family_names[fam];
    battery.require_le(worst_lhs, worst_rhs, 1e-12, input.str());
  }

  const EnergyBreakdown eb = energy_breakdown(u, p1, p2, q);

  // (ii) the constant-exponent mass pair dominates the variable one.
  battery.begin_trial();
  double split_mass = 0.0;
  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    split_mass += mesh.quadrature_weight(qp) *
                  (std::pow(av[qp], q_max) + std::pow(av[qp], q_min));
  }
  battery.require_le(eb.mass_raw, split_mass, 1e-12,
                     "split mass dominates raw mass");

  // (iii) the weighted dirichlet energy controls the raw one.
  battery.begin_trial();
  battery.require_le(eb.dirichlet_raw, p1.max_value() * eb.dirichlet, 1e-12,
                     "weighted dirichlet controls raw dirichlet");

  // (iv) the constant-exponent reference eigenvalue bounds the raw
  // quotient from below.
  battery.begin_trial();
  battery.require_le((1.0 - slack) * 0.5 * mu_hat * eb.mass_raw,
                     eb.dirichlet_raw, 1e-12,
                     "reference eigenvalue lower bound");
  return battery.take();
}

CheckReport check_inequality_chain(const DiscreteFunction& u,
                                   const ExponentField& p1,
                                   const ExponentField& p2,
                                   const ExponentField& q) {
  const SolverOptions options;
  const double lambda_min =
      estimate_embedding_eigenvalue(q.min_value(), u.mesh(), options);
  const double lambda_max =
      estimate_embedding_eigenvalue(q.max_value(), u.mesh(), options);
  return check_inequality_chain(u, p1, p2, q,
                                std::min(lambda_min, lambda_max));
}

CheckReport check_inequality_chain_battery(int n_trials, const Mesh& mesh,
                                           const ExponentField& p1,
                                           const ExponentField& p2,
                                           const ExponentField& q,
                                           double mu_hat,
                                           std::uint64_t rng_seed) {
  if (n_trials < 1) {
    throw std::invalid_argument("n_trials must be at least 1");
  }
  CheckReport total;
  total.check_name = "inequality_chain";
  for (int trial = 0; trial < n_trials; ++trial) {
    detail::DeterministicRng rng(
        detail::mix_seed(rng_seed, 0xc4a1ULL,
                         static_cast<std::uint64_t>(trial)));
    const double amplitude = std::pow(10.0, rng.uniform_in(-1.0, 1.0));
    const DiscreteFunction u = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xddULL,
                               static_cast<std::uint64_t>(trial)),
        amplitude);
    merge(total, check_inequality_chain(u, p1, p2, q, mu_hat));
  }
  return total;
}

RayProfile ray_limit_profile(const DiscreteFunction& u,
                             const std::vector<double>& t_grid,
                             const ExponentField& p1,
                             const ExponentField& p2,
                             const ExponentField& q) {
  if (max_abs(u.nodal_values()) == 0.0) {
    throw std::invalid_argument("ray profile requires a nonzero function");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("ray grid must not be empty");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) {
      throw std::invalid_argument("ray grid entries must be positive");
    }
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("ray grid must be strictly ascending");
    }
  }
  const Mesh& mesh = u.mesh();
  const std::vector<double> gm = gradient_magnitude_at_quadrature(u);
  std::vector<double> av = values_at_quadrature(u);
  for (double& v : av) v = std::abs(v);

  RayProfile profile;
  profile.t = t_grid;
  profile.dirichlet.reserve(t_grid.size());
  profile.mass.reserve(t_grid.size());
  profile.quotient.reserve(t_grid.size());
  for (const double t : t_grid) {
    double dirichlet = 0.0;
    double mass = 0.0;
    for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
      const double w = mesh.quadrature_weight(qp);
      const double g = t * gm[qp];
      const double v = t * av[qp];
      const double p1v = p1.value(qp);
      const double p2v = p2.value(qp);
      const double qv = q.value(qp);
      dirichlet += w * (std::pow(g, p1v) / p1v + std::pow(g, p2v) / p2v);
      mass += w * std::pow(v, qv) / qv;
    }
    profile.dirichlet.push_back(dirichlet);
    profile.mass.push_back(mass);
    profile.quotient.push_back(mass > 0.0 ? dirichlet / mass : kInfinity);
  }
  profile.argmin = 0;
  for (std::size_t i = 1; i < profile.quotient.size(); ++i) {
    if (profile.quotient[i] < profile.quotient[profile.argmin]) {
      profile.argmin = i;
    }
  }
  return profile;
}

GradientCheckReport probe_gradients(const DiscreteFunction& u,
                                    const ExponentField& p1,
                                    const ExponentField& p2,
                                    const ExponentField& q,
                                    const GradientCheckOptions& options) {
  if (options.sample_nodes < 1) {
    throw std::invalid_argument("sample_nodes must be at least 1");
  }
  if (!(options.step > 0.0) || !std::isfinite(options.step)) {
    throw std::invalid_argument("step must be positive");
  }
  if (!(options.lambda > 0.0)) {
    throw std::invalid_argument("lambda must be positive");
  }
  GradientCheckReport report;
  const Mesh& mesh = u.mesh();

  const std::vector<double> gm = gradient_magnitude_at_quadrature(u);
  const int nqe = mesh.quadrature_per_element();
  double max_gm = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    max_gm = std::max(max_gm, gm[e * static_cast<std::size_t>(nqe)]);
  }
  const double floor = options.kink_floor * max_gm;

  std::vector<std::vector<std::size_t>> adjacency(mesh.node_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
      adjacency[static_cast<std::size_t>(mesh.element_node(e, a))]
          .push_back(e);
    }
  }

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!mesh.is_boundary_node(i)) candidates.push_back(i);
  }
  detail::DeterministicRng rng(detail::mix_seed(options.seed, 0xfdULL));
  for (std::size_t i = candidates.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(i));
    std::swap(candidates[i - 1], candidates[std::min(j, i - 1)]);
  }

  const GradientVector g_dirichlet =
      dirichlet_gradient(u, p1, p2, options.epsilon);
  const GradientVector g_mass = mass_gradient(u, q, options.epsilon);
  const GradientVector g_dirichlet_raw =
      dirichlet_raw_gradient(u, p1, p2, options.epsilon);
  const GradientVector g_mass_raw = mass_raw_gradient(u, q, options.epsilon);
  const LambdaEnergy le =
      lambda_energy(u, options.lambda, p1, p2, q, options.epsilon);

  const double h = options.step;
  for (const std::size_t node : candidates) {
    if (report.nodes_sampled >= options.sample_nodes) break;
    bool kink = false;
    for (const std::size_t e : adjacency[node]) {
      if (gm[e * static_cast<std::size_t>(nqe)] < floor) {
        kink = true;
        break;
      }
    }
    if (kink) {
      ++report.nodes_skipped;
      continue;
    }
    ++report.nodes_sampled;

    EnergyBreakdown samples[4];
    const double offsets[4] = {2.0 * h, h, -h, -2.0 * h};
    for (int k = 0; k < 4; ++k) {
      std::vector<double> shifted = u.nodal_values();
      shifted[node] += offsets[k];
      samples[k] =
          energy_breakdown(DiscreteFunction(mesh, shifted), p1, p2, q);
    }
    const auto stencil = [&](auto pick) {
      return (-pick(samples[0]) + 8.0 * pick(samples[1]) -
              8.0 * pick(samples[2]) + pick(samples[3])) /
             (12.0 * h);
    };

    struct Entry {
      const char* name;
      double fd;
      double analytic;
    };
    const Entry entries[] = {
        {"dirichlet gradient",
         stencil([](const EnergyBreakdown& b) { return b.dirichlet; }),
         g_dirichlet[node]},
        {"mass gradient",
         stencil([](const EnergyBreakdown& b) { return b.mass; }),
         g_mass[node]},
        {"raw dirichlet gradient",
         stencil([](const EnergyBreakdown& b) { return b.dirichlet_raw; }),
         g_dirichlet_raw[node]},
        {"raw mass gradient",
         stencil([](const EnergyBreakdown& b) { return b.mass_raw; }),
         g_mass_raw[node]},
        {"lambda energy gradient",
         stencil([&](const EnergyBreakdown& b) {
           return b.dirichlet - options.lambda * b.mass;
         }),
         le.gradient[node]},
    };
    for (const Entry& entry : entries) {
      const double error = std::abs(entry.fd - entry.analytic);
      const double threshold =
          std::max(options.relative_tolerance * std::abs(entry.analytic),
                   options.absolute_tolerance);
      ++report.checks_run;
      report.max_absolute_error = std::max(report.max_absolute_error, error);
      report.worst_ratio = std::max(report.worst_ratio, error / threshold);
      if (error <= threshold) {
        ++report.checks_passed;
      } else if (report.failures.size() < kMaxWitnesses) {
        std::ostringstream input;
        input.precision(17);
        const auto pt = mesh.node(node);
        input << entry.name << " at node (" << pt[0] << ", " << pt[1] << ")";
        report.failures.push_back({input.str(), entry.fd, entry.analytic});
      }
    }
  }
  if (report.nodes_sampled == 0) {
    report.failures.push_back(
        {"no interior node clears the kink floor", 0.0, 0.0});
  }
  return report;
}

CheckReport check_gradients(int n_trials, const Mesh& mesh,
                            const ExponentField& p1, const ExponentField& p2,
                            const ExponentField& q, std::uint64_t rng_seed) {
  if (n_trials < 1) {
    throw std::invalid_argument("n_trials must be at least 1");
  }
  Battery battery("gradient_consistency");
  for (int trial = 0; trial < n_trials; ++trial) {
    battery.begin_trial();
    GradientCheckOptions options;
    options.sample_nodes = 4;
    options.seed = detail::mix_seed(rng_seed, 0x9cadULL,
                                    static_cast<std::uint64_t>(trial));
    const DiscreteFunction u = random_smooth_function(
        mesh, detail::mix_seed(rng_seed, 0xeeULL,
                               static_cast<std::uint64_t>(trial)),
        1.0);
    const GradientCheckReport probe = probe_gradients(u, p1, p2, q, options);
    // Fold the probe into the battery: the trial's violation is the worst
    // error-to-threshold excess.
    std::ostringstream input;
    input << "trial " << trial << ": " << probe.checks_run - probe.checks_passed
          << " of " << probe.checks_run << " comparisons failed";
    battery.require_le(probe.worst_ratio, 1.0, 0.0, input.str());
    battery.require_le(probe.nodes_sampled >= 1 ? 0.0 : 1.0, 0.0, 0.0,
                       "probe sampled at least one node");
  }
  return battery.take();
}

}  // namespace dpeigen
