#include "dpeigen/solver.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "deterministic_rng.hpp"
#include "dpeigen/modular.hpp"

namespace dpeigen {

void SolverOptions::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be at least 1");
  }
  if (!(gradient_tolerance > 0.0) || !std::isfinite(gradient_tolerance)) {
    throw std::invalid_argument("gradient_tolerance must be positive");
  }
  if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
    throw std::invalid_argument("initial_step must be positive");
  }
  if (!(step_shrink > 0.0) || !(step_shrink < 1.0)) {
    throw std::invalid_argument("step_shrink must lie in (0, 1)");
  }
  if (!(armijo_constant > 0.0) || !(armijo_constant < 1.0)) {
    throw std::invalid_argument("armijo_constant must lie in (0, 1)");
  }
  if (restarts < 1) {
    throw std::invalid_argument("restarts must be at least 1");
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be at least 1");
  }
  if (!(triviality_threshold > 0.0) ||
      !std::isfinite(triviality_threshold)) {
    throw std::invalid_argument("triviality_threshold must be positive");
  }
}

std::string to_string(ScanClass c) {
  switch (c) {
    case ScanClass::trivial_only:
      return "trivial_only";
    case ScanClass::eigenvalue_certified:
      return "eigenvalue_certified";
    case ScanClass::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Lambda-energy values below this are treated as a certified blow-up of the
// functional (it is unbounded below for this spectral parameter).
constexpr double kDivergenceFloor = -1e12;
constexpr double kBlowupCeiling = 1e8;
// Sup-norm below which a lambda-energy descent has collapsed onto the
// trivial minimizer and further polishing is pointless.
constexpr double kCollapseCeiling = 1e-9;
// Classification margins for the scan rows.
constexpr double kTrivialEnergyFloor = -1e-8;
constexpr double kCertifiedEnergyCeiling = -1e-10;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Sparse Cholesky factorization of the P1 stiffness matrix over interior
// nodes. Applying its inverse to nodal gradients turns plain descent into a
// mesh-robust quasi-Newton iteration; without it the step count grows with
// refinement until the pinned iteration budgets are unreachable.
class StiffnessPreconditioner {
public:
  // Factorizes the interior stiffness matrix with one positive weight per
  // element (unit weights when null). Weighted rebuilds at the current
  // iterate give the descent a metric matching the local diffusion
  // curvature, which the flat metric misrepresents badly for sub-quadratic
  // exponents.
  explicit StiffnessPreconditioner(
      const Mesh& mesh, const std::vector<double>* element_weights = nullptr) {
    const std::size_t n = mesh.node_count();
    interior_index_.assign(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mesh.is_boundary_node(i)) {
        interior_index_[i] = next++;
        interior_nodes_.push_back(i);
      }
    }
    const int m = next;
    std::vector<Eigen::Triplet<double>> triplets;
    const int npe = mesh.nodes_per_element();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const double weight =
          element_weights == nullptr ? 1.0 : (*element_weights)[e];
      const double measure = mesh.element_measure(e) * weight;
      for (int a = 0; a < npe; ++a) {
        const int ia = interior_index_[static_cast<std::size_t>(
            mesh.element_node(e, a))];
        if (ia < 0) continue;
        const auto ga = mesh.basis_gradient(e, a);
        for (int b = 0; b < npe; ++b) {
          const int ib = interior_index_[static_cast<std::size_t>(
              mesh.element_node(e, b))];
          if (ib < 0) continue;
          const auto gb = mesh.basis_gradient(e, b);
          triplets.emplace_back(ia, ib,
                                measure * (ga[0] * gb[0] + ga[1] * gb[1]));
        }
      }
    }
    Eigen::SparseMatrix<double> stiffness(m, m);
    stiffness.setFromTriplets(triplets.begin(), triplets.end());
    factor_.compute(stiffness);
    if (factor_.info() != Eigen::Success) {
      throw std::runtime_error(
          "stiffness preconditioner factorization failed");
    }
  }

  // Full-length nodal vector in, full-length preconditioned vector out;
  // boundary entries stay zero. Safe to call concurrently.
  std::vector<double> apply(const std::vector<double>& g) const {
    Eigen::VectorXd rhs(interior_nodes_.size());
    for (std::size_t k = 0; k < interior_nodes_.size(); ++k) {
      rhs[static_cast<Eigen::Index>(k)] = g[interior_nodes_[k]];
    }
    Eigen::VectorXd sol = factor_.solve(rhs);
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t k = 0; k < interior_nodes_.size(); ++k) {
      out[interior_nodes_[k]] = sol[static_cast<Eigen::Index>(k)];
    }
    return out;
  }

private:
  std::vector<int> interior_index_;
  std::vector<std::size_t> interior_nodes_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

// Runs fn(0) .. fn(count - 1), possibly on a small thread pool. Results must
// be written to per-index slots so the outcome is independent of scheduling.
void run_indexed(int count, int threads,
                 const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Problem {
  const Mesh* mesh;
  const ExponentField* p1;
  const ExponentField* p2;
  const ExponentField* q;
  QuotientKind kind;
  double epsilon;
};

struct QuotientValue {
  double value = kInfinity;
  double num = 0.0;
  double den = 0.0;
};

QuotientValue quotient_value(const Problem& pr, const DiscreteFunction& u) {
  const EnergyBreakdown eb = energy_breakdown(u, *pr.p1, *pr.p2, *pr.q);
  if (pr.kind == QuotientKind::weighted) {
    return {eb.rayleigh, eb.dirichlet, eb.mass};
  }
  return {eb.rayleigh_raw, eb.dirichlet_raw, eb.mass_raw};
}

// Per-element curvature coefficients of the double-phase diffusion term
// linearized at u: p (p - 1) (|grad u|^2 + eps^2)^((p-2)/2) summed over the
// two phases, with element-averaged exponents. This is the tangential second
// derivative of t -> (t^2 + eps^2)^(p/2), so the weighted stiffness matrix
// is the lagged-diffusivity model of the energy Hessian. Clamped so the
// matrix stays well scaled for the factorization.
std::vector<double> diffusion_weights(const Problem& pr,
                                      const DiscreteFunction& u) {
  const Mesh& mesh = *pr.mesh;
  const std::vector<double> grads = element_gradients(u);
  const int npq = mesh.quadrature_per_element();
  const double eps2 = pr.epsilon * pr.epsilon;
  std::vector<double> weights(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double gx = grads[2 * e];
    const double gy = grads[2 * e + 1];
    const double g2 = gx * gx + gy * gy + eps2;
    double p1e = 0.0;
    double p2e = 0.0;
    for (int k = 0; k < npq; ++k) {
      const std::size_t qp = e * static_cast<std::size_t>(npq) +
                             static_cast<std::size_t>(k);
      p1e += pr.p1->value(qp);
      p2e += pr.p2->value(qp);
    }
    p1e /= npq;
    p2e /= npq;
    const double w = p1e * (p1e - 1.0) * std::pow(g2, 0.5 * (p1e - 2.0)) +
                     p2e * (p2e - 1.0) * std::pow(g2, 0.5 * (p2e - 2.0));
    weights[e] = std::clamp(w, 1e-6, 1e8);
  }
  return weights;
}

void quotient_gradients(const Problem& pr, const DiscreteFunction& u,
                        GradientVector* gnum, GradientVector* gden) {
  if (pr.kind == QuotientKind::weighted) {
    *gnum = dirichlet_gradient(u, *pr.p1, *pr.p2, pr.epsilon);
    *gden = mass_gradient(u, *pr.q, pr.epsilon);
  } else {
    *gnum = dirichlet_raw_gradient(u, *pr.p1, *pr.p2, pr.epsilon);
    *gden = mass_raw_gradient(u, *pr.q, pr.epsilon);
  }
}

double lambda_value(const Problem& pr, double lambda,
                    const DiscreteFunction& u) {
  const EnergyBreakdown eb = energy_breakdown(u, *pr.p1, *pr.p2, *pr.q);
  return eb.dirichlet - lambda * eb.mass;
}

// Samples of |grad u| and |u| at the quadrature points, for evaluating
// energies of scaled copies t * u without reassembling.
struct RadialCache {
  const Problem* pr;
  std::vector<double> gm;
  std::vector<double> av;
};

RadialCache make_radial_cache(const Problem& pr, const DiscreteFunction& u) {
  return {&pr, gradient_magnitude_at_quadrature(u), values_at_quadrature(u)};
}

double quotient_at_scale(const RadialCache& c, double t) {
  const Mesh& mesh = *c.pr->mesh;
  const bool weighted = c.pr->kind == QuotientKind::weighted;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    const double w = mesh.quadrature_weight(qp);
    const double g = t * c.gm[qp];
    const double v = std::abs(t * c.av[qp]);
    const double p1v = c.pr->p1->value(qp);
    const double p2v = c.pr->p2->value(qp);
    const double qv = c.pr->q->value(qp);
    if (weighted) {
      num += w * (std::pow(g, p1v) / p1v + std::pow(g, p2v) / p2v);
      den += w * std::pow(v, qv) / qv;
    } else {
      num += w * (std::pow(g, p1v) + std::pow(g, p2v));
      den += w * std::pow(v, qv);
    }
  }
  return den > 0.0 ? num / den : kInfinity;
}

double lambda_at_scale(const RadialCache& c, double lambda, double t) {
  const Mesh& mesh = *c.pr->mesh;
  double dirichlet = 0.0;
  double mass = 0.0;
  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    const double w = mesh.quadrature_weight(qp);
    const double g = t * c.gm[qp];
    const double v = std::abs(t * c.av[qp]);
    const double p1v = c.pr->p1->value(qp);
    const double p2v = c.pr->p2->value(qp);
    const double qv = c.pr->q->value(qp);
    dirichlet += w * (std::pow(g, p1v) / p1v + std::pow(g, p2v) / p2v);
    mass += w * std::pow(v, qv) / qv;
  }
  return dirichlet - lambda * mass;
}

// Coarse log-grid search plus golden-section refinement for the best radial
// placement t * u of a fresh start. Covers t in [1e-3, 1e3].
double best_initial_scale(const RadialCache& c) {
  const double span = std::log(1000.0);
  const int samples = 29;
  double best_s = 0.0;
  double best_v = quotient_at_scale(c, 1.0);
  for (int k = 0; k < samples; ++k) {
    const double s =
        -span + 2.0 * span * static_cast<double>(k) / (samples - 1);
    const double v = quotient_at_scale(c, std::exp(s));
    if (v < best_v) {
      best_v = v;
      best_s = s;
    }
  }
  const double half_step = span / (samples - 1);
  double a = best_s - half_step;
  double b = best_s + half_step;
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = quotient_at_scale(c, std::exp(x1));
  double f2 = quotient_at_scale(c, std::exp(x2));
  for (int k = 0; k < 18; ++k) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = quotient_at_scale(c, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = quotient_at_scale(c, std::exp(x2));
    }
  }
  const double s_refined = 0.5 * (a + b);
  const double v_refined = quotient_at_scale(c, std::exp(s_refined));
  return v_refined < best_v ? std::exp(s_refined) : std::exp(best_s);
}

// Greedy geometric probing of the radial direction around the current
// iterate, plus a conditioning rescale when the amplitude drifts far from
// unity. Every move is accepted only on strict improvement of the recomputed
// quotient, which keeps the recorded descent history non-increasing.
void radial_and_normalize(const Problem& pr, std::vector<double>& u,
                          QuotientValue& qv) {
  const Mesh& mesh = *pr.mesh;
  const DiscreteFunction uf(mesh, u);
  const RadialCache cache = make_radial_cache(pr, uf);
  double t = 1.0;
  double best = qv.value;
  for (int k = 0; k < 8; ++k) {
    const double cand = t * 1.25;
    const double v = quotient_at_scale(cache, cand);
    if (v < best) {
      t = cand;
      best = v;
    } else {
      break;
    }
  }
  if (t == 1.0) {
    for (int k = 0; k < 8; ++k) {
      const double cand = t * 0.8;
      const double v = quotient_at_scale(cache, cand);
      if (v < best) {
        t = cand;
        best = v;
      } else {
        break;
      }
    }
  }
  if (t != 1.0) {
    std::vector<double> scaled(u);
    for (double& x : scaled) x *= t;
    const QuotientValue cand = quotient_value(pr, DiscreteFunction(mesh, scaled));
    if (cand.value < qv.value) {
      u = std::move(scaled);
      qv = cand;
    }
  }
  const double mx = max_abs(u);
  if (mx > 0.0 && (mx > 1e4 || mx < 1e-4)) {
    std::vector<double> scaled(u);
    for (double& x : scaled) x /= mx;
    const QuotientValue cand = quotient_value(pr, DiscreteFunction(mesh, scaled));
    if (cand.value <= qv.value) {
      u = std::move(scaled);
      qv = cand;
    }
  }
}

struct RestartOutcome {
  std::vector<double> u;
  double value = kInfinity;
  double residual = kInfinity;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> history;
};

// Euclidean norm of the stationarity defect grad_num - value * grad_den and
// the quotient gradient (defect / den) restricted to interior nodes.
double stationarity_defect(const Mesh& mesh, const GradientVector& gnum,
                           const GradientVector& gden, const QuotientValue& qv,
                           std::vector<double>* grad) {
  double defect2 = 0.0;
  if (grad != nullptr) grad->assign(gnum.size(), 0.0);
  for (std::size_t i = 0; i < gnum.size(); ++i) {
    if (mesh.is_boundary_node(i)) continue;
    const double d = gnum[i] - qv.value * gden[i];
    defect2 += d * d;
    if (grad != nullptr) (*grad)[i] = d / qv.den;
  }
  return std::sqrt(defect2);
}

RestartOutcome run_quotient_descent(const Problem& pr, std::vector<double> u,
                                    const SolverOptions& opt) {
  const Mesh& mesh = *pr.mesh;
  RestartOutcome out;
  {
    const DiscreteFunction uf(mesh, u);
    const RadialCache cache = make_radial_cache(pr, uf);
    const double t = best_initial_scale(cache);
    if (t != 1.0) {
      for (double& x : u) x *= t;
    }
  }
  DiscreteFunction uf(mesh, u);
  QuotientValue qv = quotient_value(pr, uf);
  if (!std::isfinite(qv.value)) {
    out.u = std::move(u);
    return out;
  }
  out.history.emplace_back(0, qv.value);
  double step = opt.initial_step;
  double ladder_top = 1e3;
  GradientVector gnum;
  GradientVector gden;
  std::vector<double> grad;
  int it = 1;
  for (; it <= opt.max_iterations; ++it) {
    quotient_gradients(pr, uf, &gnum, &gden);
    out.residual = stationarity_defect(mesh, gnum, gden, qv, &grad);
    if (out.residual <= opt.gradient_tolerance) {
      out.converged = true;
      break;
    }
    // Lagged-diffusivity metric, re-linearized each iteration. A fixed flat
    // metric zigzags indefinitely when the diffusion coefficients vary
    // strongly (sub-quadratic exponents concentrate curvature where the
    // gradient is small).
    const std::vector<double> weights = diffusion_weights(pr, uf);
    const StiffnessPreconditioner metric(mesh, &weights);
    std::vector<double> dir = metric.apply(grad);
    for (double& d : dir) d = -d;
    const double slope = dot(grad, dir);
    if (!(slope < 0.0)) break;
    double beta = step;
    bool accepted = false;
    QuotientValue tv;
    std::vector<double> trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i] += beta * dir[i];
      }
      tv = quotient_value(pr, DiscreteFunction(mesh, trial));
      if (std::isfinite(tv.value) && tv.value < qv.value &&
          tv.value <= qv.value + opt.armijo_constant * beta * slope) {
        accepted = true;
        break;
      }
      beta *= opt.step_shrink;
    }
    if (!accepted) {
      // Near a minimizer the quotient is flat to machine precision, so the
      // Armijo test cannot certify progress even while the stationarity
      // defect sits above tolerance. The defect itself is free of that
      // cancellation; accept a step that shrinks it while moving the value
      // by at most rounding noise. The useful step scale is unrelated to
      // the adapted `step`, so probe a geometric ladder: take the first
      // rung that cuts the defect by 10%, and otherwise the best rung that
      // cuts it by at least 1%, so slow linear endgame progress is not
      // mistaken for a stall.
      const double value_band = 1e-12 * std::max(1.0, std::abs(qv.value));
      double fallback = ladder_top;
      double best_defect = kInfinity;
      double best_scale = 0.0;
      QuotientValue best_tv;
      std::vector<double> best_trial;
      GradientVector tnum;
      GradientVector tden;
      for (int ls = 0; ls < 16; ++ls) {
        trial = u;
        for (std::size_t i = 0; i < trial.size(); ++i) {
          trial[i] += fallback * dir[i];
        }
        const DiscreteFunction tf(mesh, trial);
        tv = quotient_value(pr, tf);
        if (std::isfinite(tv.value) && tv.value <= qv.value + value_band) {
          quotient_gradients(pr, tf, &tnum, &tden);
          const double defect =
              stationarity_defect(mesh, tnum, tden, tv, nullptr);
          if (defect < best_defect) {
            best_defect = defect;
            best_scale = fallback;
            best_tv = tv;
            best_trial = trial;
          }
          if (defect <= 0.9 * out.residual) break;
        }
        fallback *= 0.25;
      }
      if (best_defect <= 0.99 * out.residual) {
        accepted = true;
        beta = best_scale;
        tv = best_tv;
        trial = std::move(best_trial);
        ladder_top = std::min(1e3, best_scale * 4.0);
      }
    }
    if (!accepted) break;
    u = std::move(trial);
    qv = tv;
    if (it <= 20 || it % 5 == 0) {
      radial_and_normalize(pr, u, qv);
    }
    uf = DiscreteFunction(mesh, u);
    out.history.emplace_back(it, qv.value);
    step = std::min(beta * 2.0, 1e3);
  }
  out.iterations = std::min(it, opt.max_iterations);
  uf = DiscreteFunction(mesh, u);
  qv = quotient_value(pr, uf);
  quotient_gradients(pr, uf, &gnum, &gden);
  out.residual = stationarity_defect(mesh, gnum, gden, qv, nullptr);
  out.converged = out.residual <= opt.gradient_tolerance;
  out.value = qv.value;
  out.u = std::move(u);
  return out;
}

// Start 0 is the positive product-of-sines bump; later starts are sign-mixed
// random nodal data smoothed by one preconditioner pass.
std::vector<double> make_start(const Mesh& mesh,
                               const StiffnessPreconditioner& pc, int restart,
                               std::uint64_t stream_seed) {
  const std::size_t n = mesh.node_count();
  std::vector<double> u(n, 0.0);
  if (restart == 0) {
    const auto lo = mesh.lower_corner();
    const auto hi = mesh.upper_corner();
    for (std::size_t i = 0; i < n; ++i) {
      if (mesh.is_boundary_node(i)) continue;
      const auto p = mesh.node(i);
      double v = std::sin(kPi * (p[0] - lo[0]) / (hi[0] - lo[0]));
      if (mesh.dimension() == 2) {
        v *= std::sin(kPi * (p[1] - lo[1]) / (hi[1] - lo[1]));
      }
      u[i] = v;
    }
    return u;
  }
  detail::DeterministicRng rng(stream_seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mesh.is_boundary_node(i)) u[i] = rng.uniform_signed();
  }
  u = pc.apply(u);
  const double mx = max_abs(u);
  if (mx > 0.0) {
    for (double& x : u) x /= mx;
  }
  return u;
}

EigenEstimate minimize_rayleigh_impl(const Problem& pr,
                                     const StiffnessPreconditioner& pc,
                                     const SolverOptions& options) {
  const int count = options.restarts;
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(count));
  run_indexed(count, options.threads, [&](int r) {
    std::vector<double> start = make_start(
        *pr.mesh, pc, r,
        detail::mix_seed(options.rng_seed, 0x5eedULL,
                         static_cast<std::uint64_t>(r)));
    outcomes[static_cast<std::size_t>(r)] =
        run_quotient_descent(pr, std::move(start), options);
  });
  // Near-ties between restarts are rounding noise at the shared minimum;
  // inside the tie band prefer a converged outcome with the smaller defect.
  auto better = [](const RestartOutcome& a, const RestartOutcome& b) {
    const double band =
        1e-12 * std::max(1.0, std::min(std::abs(a.value), std::abs(b.value)));
    if (a.value < b.value - band) return true;
    if (b.value < a.value - band) return false;
    if (a.converged != b.converged) return a.converged;
    return a.residual < b.residual;
  };
  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (better(outcomes[r], outcomes[best])) best = r;
  }
  RestartOutcome& win = outcomes[best];
  if (!std::isfinite(win.value)) {
    throw std::runtime_error(
        "quotient minimization failed to reach a finite value");
  }
  return EigenEstimate{win.value, DiscreteFunction(*pr.mesh, std::move(win.u)),
                       win.residual, win.iterations, win.converged,
                       std::move(win.history)};
}

struct LambdaOutcome {
  std::vector<double> u;
  double value = kInfinity;
  double residual = kInfinity;
  bool converged = false;
  bool diverged = false;
  bool collapsed = false;
};

// Greedy geometric probing of the scaling direction for the lambda-energy;
// the scale is its stiffest mode and a one-dimensional search handles it
// exactly. Moves are accepted only on strict improvement of the recomputed
// value.
void lambda_radial(const Problem& pr, double lambda, std::vector<double>& u,
                   double& value) {
  const Mesh& mesh = *pr.mesh;
  const DiscreteFunction uf(mesh, u);
  const RadialCache cache = make_radial_cache(pr, uf);
  double t = 1.0;
  double best = value;
  for (int k = 0; k < 8; ++k) {
    const double cand = t * 1.25;
    const double v = lambda_at_scale(cache, lambda, cand);
    if (v < best) {
      t = cand;
      best = v;
    } else {
      break;
    }
  }
  if (t == 1.0) {
    for (int k = 0; k < 8; ++k) {
      const double cand = t * 0.8;
      const double v = lambda_at_scale(cache, lambda, cand);
      if (v < best) {
        t = cand;
        best = v;
      } else {
        break;
      }
    }
  }
  if (t != 1.0) {
    std::vector<double> scaled(u);
    for (double& x : scaled) x *= t;
    const double cand =
        lambda_value(pr, lambda, DiscreteFunction(mesh, scaled));
    if (cand < value) {
      u = std::move(scaled);
      value = cand;
    }
  }
}

// Scalar endgame for plateau configurations. Sub-quadratic diffusion gives
// the minimizer a flat top; the element there has |grad u| of order the
// regularization, so the flanking nodal equations are so stiff that the
// right correction is a few ulps of the nodal values, far below what any
// vector line search resolves. The residual there splits into a stiff
// antisymmetric pair mode across the plateau element and a soft symmetric
// mode; both are strictly monotone along their directions (positive
// curvature), so equilibrate each by bisection. Commits only if the full
// defect norm improves.
bool coordinate_polish(const Problem& pr, double lambda,
                       std::vector<double>& u, double& value,
                       double& residual, const SolverOptions& opt) {
  const Mesh& mesh = *pr.mesh;
  auto eval = [&](const std::vector<double>& vals) {
    return lambda_energy(DiscreteFunction(mesh, vals), lambda, *pr.p1, *pr.p2,
                         *pr.q, pr.epsilon);
  };
  std::vector<double> v = u;
  LambdaEnergy le = eval(v);
  double res = std::sqrt(dot(le.gradient, le.gradient));
  const double res_in = res;
  using Direction = std::vector<std::pair<std::size_t, double>>;
  // Directional gradient component t -> d . grad(u + t d) is strictly
  // increasing; walk a bracket against its sign, then bisect to the ulp.
  const auto equilibrate = [&](const Direction& d) {
    double g0 = 0.0;
    for (const auto& [i, c] : d) g0 += c * le.gradient[i];
    if (g0 == 0.0) return false;
    std::vector<double> center(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) center[k] = v[d[k].first];
    const auto apply = [&](double t) {
      for (std::size_t k = 0; k < d.size(); ++k) {
        v[d[k].first] = center[k] + t * d[k].second;
      }
    };
    const auto probe_g = [&](double t) {
      apply(t);
      const LambdaEnergy pe = eval(v);
      double g = 0.0;
      for (const auto& [i, c] : d) g += c * pe.gradient[i];
      return g;
    };
    double scale = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      scale = std::max(scale, std::abs(center[k]) * std::abs(d[k].second));
    }
    double delta = 1e-15 * std::max(1.0, scale);
    double lo = 0.0;
    double hi = 0.0;
    double glo = g0;
    double ghi = g0;
    bool bracketed = false;
    for (int k = 0; k < 80; ++k) {
      const double t = g0 > 0.0 ? -delta : delta;
      const double gp = probe_g(t);
      if (g0 > 0.0) {
        lo = t;
        glo = gp;
      } else {
        hi = t;
        ghi = gp;
      }
      if (gp == 0.0 || (gp > 0.0) != (g0 > 0.0)) {
        bracketed = true;
        break;
      }
      delta *= 4.0;
    }
    if (!bracketed) {
      apply(0.0);
      le = eval(v);
      return false;
    }
    if (g0 > 0.0) {
      hi = 0.0;
      ghi = g0;
    } else {
      lo = 0.0;
      glo = g0;
    }
    double best_t = std::abs(glo) <= std::abs(ghi) ? lo : hi;
    double best_g = std::min(std::abs(glo), std::abs(ghi));
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const double gm = probe_g(mid);
      if (std::abs(gm) < best_g) {
        best_g = std::abs(gm);
        best_t = mid;
      }
      if (gm == 0.0) break;
      if (gm > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    apply(best_t);
    le = eval(v);
    return true;
  };
  const int npe = mesh.nodes_per_element();
  for (int sweep = 0; sweep < 8 && res > opt.gradient_tolerance; ++sweep) {
    std::vector<std::size_t> worst;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!mesh.is_boundary_node(i) && le.gradient[i] != 0.0) {
        worst.push_back(i);
      }
    }
    if (worst.empty()) break;
    std::sort(worst.begin(), worst.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(le.gradient[a]) > std::abs(le.gradient[b]);
    });
    if (worst.size() > 8) worst.resize(8);
    const auto adjacent = [&](std::size_t a, std::size_t b) {
      for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        bool has_a = false;
        bool has_b = false;
        for (int l = 0; l < npe; ++l) {
          const std::size_t node =
              static_cast<std::size_t>(mesh.element_node(e, l));
          has_a = has_a || node == a;
          has_b = has_b || node == b;
        }
        if (has_a && has_b) return true;
      }
      return false;
    };
    std::vector<bool> used(worst.size(), false);
    bool moved = false;
    for (std::size_t a = 0; a < worst.size(); ++a) {
      if (used[a]) continue;
      used[a] = true;
      std::size_t partner = worst.size();
      for (std::size_t b = a + 1; b < worst.size(); ++b) {
        if (!used[b] && adjacent(worst[a], worst[b])) {
          partner = b;
          break;
        }
      }
      if (partner < worst.size()) {
        used[partner] = true;
        const std::size_t i = worst[a];
        const std::size_t j = worst[partner];
        moved = equilibrate({{i, 1.0}, {j, -1.0}}) || moved;
        moved = equilibrate({{i, 1.0}, {j, 1.0}}) || moved;
        moved = equilibrate({{i, 1.0}}) || moved;
        moved = equilibrate({{j, 1.0}}) || moved;
      } else {
        moved = equilibrate({{worst[a], 1.0}}) || moved;
      }
    }
    if (!moved) break;
    res = std::sqrt(dot(le.gradient, le.gradient));
  }
  if (res < 0.99 * res_in) {
    value = le.value;
    residual = res;
    u = std::move(v);
    return true;
  }
  return false;
}

LambdaOutcome run_lambda_descent(const Problem& pr, double lambda,
                                 std::vector<double> u,
                                 const SolverOptions& opt) {
  const Mesh& mesh = *pr.mesh;
  LambdaOutcome out;
  DiscreteFunction uf(mesh, u);
  double value = lambda_value(pr, lambda, uf);
  double step = opt.initial_step;
  double ladder_top = 1e3;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double mx = max_abs(u);
    if (value < kDivergenceFloor || mx > kBlowupCeiling) {
      out.diverged = true;
      break;
    }
    if (mx < kCollapseCeiling) {
      out.collapsed = true;
      break;
    }
    const LambdaEnergy le =
        lambda_energy(uf, lambda, *pr.p1, *pr.p2, *pr.q, pr.epsilon);
    value = le.value;
    out.residual = std::sqrt(dot(le.gradient, le.gradient));
    if (out.residual <= opt.gradient_tolerance) {
      out.converged = true;
      break;
    }
    // Same per-iteration lagged-diffusivity metric as the quotient descent.
    const std::vector<double> weights = diffusion_weights(pr, uf);
    const StiffnessPreconditioner metric(mesh, &weights);
    std::vector<double> dir = metric.apply(le.gradient);
    for (double& d : dir) d = -d;
    const double slope = dot(le.gradient, dir);
    if (!(slope < 0.0)) break;
    double beta = step;
    bool accepted = false;
    double tv = 0.0;
    std::vector<double> trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i] += beta * dir[i];
      }
      tv = lambda_value(pr, lambda, DiscreteFunction(mesh, trial));
      if (std::isfinite(tv) && tv < value &&
          tv <= value + opt.armijo_constant * beta * slope) {
        accepted = true;
        break;
      }
      beta *= opt.step_shrink;
    }
    if (!accepted) {
      // Flat-basin endgame, as in the quotient descent: accept a step that
      // shrinks the gradient norm while moving the value by at most
      // rounding noise, preferring a 10% cut but settling for the best rung
      // with at least a 1% cut.
      const double value_band = 1e-12 * std::max(1.0, std::abs(value));
      double fallback = ladder_top;
      double best_defect = kInfinity;
      double best_scale = 0.0;
      double best_tv = 0.0;
      std::vector<double> best_trial;
      for (int ls = 0; ls < 16; ++ls) {
        trial = u;
        for (std::size_t i = 0; i < trial.size(); ++i) {
          trial[i] += fallback * dir[i];
        }
        const DiscreteFunction tf(mesh, trial);
        const LambdaEnergy te =
            lambda_energy(tf, lambda, *pr.p1, *pr.p2, *pr.q, pr.epsilon);
        if (std::isfinite(te.value) && te.value <= value + value_band) {
          const double defect = std::sqrt(dot(te.gradient, te.gradient));
          if (defect < best_defect) {
            best_defect = defect;
            best_scale = fallback;
            best_tv = te.value;
            best_trial = trial;
          }
          if (defect <= 0.9 * out.residual) break;
        }
        fallback *= 0.25;
      }
      if (best_defect <= 0.99 * out.residual) {
        accepted = true;
        beta = best_scale;
        tv = best_tv;
        trial = std::move(best_trial);
        ladder_top = std::min(1e3, best_scale * 4.0);
      }
    }
    if (!accepted) {
      if (coordinate_polish(pr, lambda, u, value, out.residual, opt)) {
        uf = DiscreteFunction(mesh, u);
        continue;
      }
      break;
    }
    u = std::move(trial);
    value = tv;
    if (it <= 20 || it % 5 == 0) {
      lambda_radial(pr, lambda, u, value);
    }
    uf = DiscreteFunction(mesh, u);
    step = std::min(beta * 2.0, 1e3);
  }
  uf = DiscreteFunction(mesh, u);
  out.value = lambda_value(pr, lambda, uf);
  out.residual = weak_residual(uf, lambda, *pr.p1, *pr.p2, *pr.q, pr.epsilon);
  out.converged = out.residual <= opt.gradient_tolerance;
  out.u = std::move(u);
  return out;
}

ScanClass classify_row(double min_energy, double norm, double residual,
                       const SolverOptions& opt) {
  if (norm < opt.triviality_threshold && min_energy >= kTrivialEnergyFloor) {
    return ScanClass::trivial_only;
  }
  if (min_energy < kCertifiedEnergyCeiling &&
      norm >= opt.triviality_threshold &&
      residual <= opt.gradient_tolerance) {
    return ScanClass::eigenvalue_certified;
  }
  return ScanClass::inconclusive;
}

std::pair<ScanRow, DiscreteFunction> run_lambda_row(
    const Problem& pr, const StiffnessPreconditioner& pc, double lambda,
    const DiscreteFunction& warm, const SolverOptions& options) {
  const Mesh& mesh = *pr.mesh;
  const int count = options.restarts;
  std::vector<LambdaOutcome> outcomes(static_cast<std::size_t>(count));
  const std::uint64_t lambda_bits = std::bit_cast<std::uint64_t>(lambda);
  run_indexed(count, options.threads, [&](int r) {
    std::vector<double> start;
    if (r == 0) {
      // Scale the warm start to its most negative reachable energy before
      // descending; a negative initial value certifies immediately that the
      // lambda-energy dips below zero.
      if (max_abs(warm.nodal_values()) > 0.0) {
        const RadialCache cache = make_radial_cache(pr, warm);
        static constexpr double kScales[] = {0.25, 0.5, 1.0, 2.0, 4.0};
        double best_t = 1.0;
        double best_v = kInfinity;
        for (const double t : kScales) {
          const double v = lambda_at_scale(cache, lambda, t);
          if (v < best_v) {
            best_v = v;
            best_t = t;
          }
        }
        start = warm.nodal_values();
        for (double& x : start) x *= best_t;
      } else {
        start = make_start(mesh, pc, 0, 0);
      }
    } else {
      start = make_start(
          mesh, pc, r,
          detail::mix_seed(options.rng_seed, lambda_bits,
                           static_cast<std::uint64_t>(r)));
    }
    outcomes[static_cast<std::size_t>(r)] =
        run_lambda_descent(pr, lambda, std::move(start), options);
  });
  auto better = [](const LambdaOutcome& a, const LambdaOutcome& b) {
    const double band =
        1e-12 * std::max(1.0, std::min(std::abs(a.value), std::abs(b.value)));
    if (a.value < b.value - band) return true;
    if (b.value < a.value - band) return false;
    if (a.converged != b.converged) return a.converged;
    return a.residual < b.residual;
  };
  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (better(outcomes[r], outcomes[best])) best = r;
  }
  LambdaOutcome& win = outcomes[best];
  DiscreteFunction minimizer(mesh, std::move(win.u));
  ScanRow row;
  row.lambda = lambda;
  row.min_energy = win.value;
  row.minimizer_norm = sobolev_norm(minimizer, *pr.p1);
  row.residual = win.residual;
  row.classification =
      classify_row(row.min_energy, row.minimizer_norm, row.residual, options);
  return {row, std::move(minimizer)};
}

void require_valid_triple(const ExponentField& p1, const ExponentField& p2,
                          const ExponentField& q, const Mesh& mesh,
                          const SolverOptions& options) {
  if (options.allow_degenerate) return;
  const ValidationReport report =
      validate_triple(p1, p2, q, mesh.dimension());
  if (!report.ok()) {
    throw std::invalid_argument(describe_failure(report));
  }
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("regularization epsilon must be positive");
  }
}

}  // namespace

EigenEstimate minimize_rayleigh(QuotientKind kind, const ExponentField& p1,
                                const ExponentField& p2,
                                const ExponentField& q, const Mesh& mesh,
                                const SolverOptions& options, double epsilon) {
  options.validate();
  require_epsilon(epsilon);
  require_valid_triple(p1, p2, q, mesh, options);
  const Problem pr{&mesh, &p1, &p2, &q, kind, epsilon};
  const StiffnessPreconditioner pc(mesh);
  return minimize_rayleigh_impl(pr, pc, options);
}

std::pair<ScanRow, DiscreteFunction> minimize_lambda_energy(
    double lambda, const ExponentField& p1, const ExponentField& p2,
    const ExponentField& q, const Mesh& mesh, const SolverOptions& options,
    const DiscreteFunction* warm_start, double epsilon) {
  options.validate();
  require_epsilon(epsilon);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("spectral parameter must be positive");
  }
  require_valid_triple(p1, p2, q, mesh, options);
  const Problem pr{&mesh, &p1, &p2, &q, QuotientKind::weighted, epsilon};
  const StiffnessPreconditioner pc(mesh);
  if (warm_start != nullptr) {
    return run_lambda_row(pr, pc, lambda, *warm_start, options);
  }
  const EigenEstimate weighted = minimize_rayleigh_impl(pr, pc, options);
  return run_lambda_row(pr, pc, lambda, weighted.minimizer, options);
}

ScanReport scan_lambda(const std::vector<double>& lambda_grid,
                       const ExponentField& p1, const ExponentField& p2,
                       const ExponentField& q, const Mesh& mesh,
                       const SolverOptions& options, double epsilon) {
  options.validate();
  require_epsilon(epsilon);
  if (lambda_grid.empty()) {
    throw std::invalid_argument("lambda grid must not be empty");
  }
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0) || !std::isfinite(lambda_grid[i])) {
      throw std::invalid_argument("lambda grid entries must be positive");
    }
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) {
      throw std::invalid_argument("lambda grid must be strictly ascending");
    }
  }
  require_valid_triple(p1, p2, q, mesh, options);
  const Problem weighted_pr{&mesh, &p1, &p2, &q, QuotientKind::weighted,
                            epsilon};
  const Problem raw_pr{&mesh, &p1, &p2, &q, QuotientKind::raw, epsilon};
  const StiffnessPreconditioner pc(mesh);
  ScanReport report;
  const EigenEstimate weighted =
      minimize_rayleigh_impl(weighted_pr, pc, options);
  const EigenEstimate raw = minimize_rayleigh_impl(raw_pr, pc, options);
  report.lambda1_estimate = weighted.lambda_hat;
  report.lambda0_estimate = raw.lambda_hat;
  if (!weighted.converged) {
    report.warnings.push_back(
        "weighted quotient minimization did not reach the gradient "
        "tolerance");
  }
  if (!raw.converged) {
    report.warnings.push_back(
        "raw quotient minimization did not reach the gradient tolerance");
  }
  for (const double lambda : lambda_grid) {
    try {
      auto [row, minimizer] =
          run_lambda_row(weighted_pr, pc, lambda, weighted.minimizer, options);
      (void)minimizer;
      report.rows.push_back(row);
    } catch (const std::exception& e) {
      ScanRow row;
      row.lambda = lambda;
      row.min_energy = 0.0;
      row.minimizer_norm = 0.0;
      row.residual = kInfinity;
      row.classification = ScanClass::inconclusive;
      report.rows.push_back(row);
      std::ostringstream oss;
      oss << "lambda " << lambda << ": " << e.what();
      report.warnings.push_back(oss.str());
    }
  }
  bool seen_certified = false;
  for (const ScanRow& row : report.rows) {
    if (row.classification == ScanClass::eigenvalue_certified) {
      seen_certified = true;
    } else if (seen_certified) {
      std::ostringstream oss;
      oss << "classification is not upward closed: lambda " << row.lambda
          << " is " << to_string(row.classification)
          << " above a certified sample";
      report.warnings.push_back(oss.str());
    }
  }
  return report;
}

double estimate_embedding_eigenvalue(double r, const Mesh& mesh,
                                     const SolverOptions& options) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw std::invalid_argument("embedding exponent must satisfy r > 1");
  }
  options.validate();
  const ExponentField constant_field = ExponentField::from_values(
      mesh, std::vector<double>(mesh.quadrature_count(), r), "constant");
  SolverOptions opts = options;
  opts.allow_degenerate = true;
  const EigenEstimate estimate =
      minimize_rayleigh(QuotientKind::raw, constant_field, constant_field,
                        constant_field, mesh, opts);
  // The raw quotient doubles the classical Rayleigh quotient in the
  // equal-exponent limit.
  return estimate.lambda_hat / 2.0;
}

}  // namespace dpeigen
