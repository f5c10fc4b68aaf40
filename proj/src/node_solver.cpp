#include "smpnp/node_solver.hpp"

#include "smpnp/fem.hpp"
#include "smpnp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

namespace smpnp {

NodeSystem NodeSystem::make(const SpeciesSet& s, std::span<const double> target, double u, double cap)
{
  if (target.size() != s.size()) throw std::invalid_argument("node system: target length mismatch");
  NodeSystem sys;
  sys.species = &s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sys.target[i] = target[i];
    sys.boltzmann[i] = capped_exp(-s[i].Z * u, cap);
  }
  return sys;
}

namespace {

double water(const NodeSystem& sys, std::span<const double> p) { return sys.species->water_fraction(p); }

double inf_norm(std::span<const double> x)
{
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<double> residual(const NodeSystem& sys, std::span<const double> p)
{
  const auto& s = *sys.species;
  const double w = water(sys, p);
  if (!(w > 0)) throw FeasibilityError("node system: nonpositive water fraction");
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    f[i] = p[i] - sys.target[i] * std::pow(w, s.exponent(i)) * sys.boltzmann[i];
  }
  return f;
}

std::vector<double> jacobian(const NodeSystem& sys, std::span<const double> p)
{
  const auto& s = *sys.species;
  const std::size_t n = s.size();
  const double w = water(sys, p);
  if (!(w > 0)) throw FeasibilityError("node system: nonpositive water fraction");
  std::vector<double> j(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    j[i * n + i] = 1;
    if (s.reduction()) continue;
    const double a = s.gamma() * s.exponent(i) * sys.target[i] * std::pow(w, s.exponent(i) - 1) * sys.boltzmann[i];
    for (std::size_t k = 0; k < n; ++k) j[i * n + k] += a * s[k].v;
  }
  return j;
}

double water_fraction_root(const NodeSystem& sys)
{
  const auto& s = *sys.species;
  const std::size_t n = s.size();
  if (s.reduction()) throw std::invalid_argument("water_fraction_root: no size effects in reduction mode");
  // ψ(t) = e^t − 1 + γ Σ v_i c̄_i E_i e^{e_i t}, increasing in t = ln w.
  auto psi = [&](double t) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += s[i].v * sys.target[i] * sys.boltzmann[i] * std::exp(s.exponent(i) * t);
    return std::exp(t) - 1 + s.gamma() * sum;
  };
  double hi = 0, lo = -1;
  while (psi(lo) > 0) {
    hi = lo;
    lo *= 2;
    if (lo < -1e4) throw NodeSolveError("water fraction root below representable range");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, -lo); ++k) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0 ? hi : lo) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

std::vector<double> newton_step(const NodeSystem& sys, std::span<const double> p, std::span<const double> rhs)
{
  const auto& s = *sys.species;
  const std::size_t n = s.size();
  std::vector<double> x(rhs.begin(), rhs.end());
  if (s.reduction()) return x;
  const double w = water(sys, p);
  if (!(w > 0)) throw FeasibilityError("node system: nonpositive water fraction");
  // J = I + a vᵀ, inverted by Sherman-Morrison.
  std::array<double, kMaxSpecies> a{};
  double va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = s.gamma() * s.exponent(i) * sys.target[i] * std::pow(w, s.exponent(i) - 1) * sys.boltzmann[i];
    va += s[i].v * a[i];
    vb += s[i].v * rhs[i];
  }
  const double t = vb / (1 + va);
  for (std::size_t i = 0; i < n; ++i) x[i] -= a[i] * t;
  return x;
}

namespace {

void newton_iterate(const NodeSystem& sys, const NewtonOptions& opt, NewtonReport& rep)
{
  const auto& s = *sys.species;
  const std::size_t n = s.size();
  auto f = residual(sys, rep.p);
  std::vector<double> trial(n), neg(n);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) neg[i] = -f[i];
    const auto step = newton_step(sys, rep.p, neg);

    double lambda = 1;
    int halvings = 0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = rep.p[i] + lambda * step[i];
      // Negative iterates can lead to spurious roots, so positivity is kept too.
      const bool positive = std::all_of(trial.begin(), trial.end(), [](double v) { return v > 0; });
      if (positive && water(sys, trial) > 0) break;
      if (++halvings > opt.max_halvings) {
        rep.step_norm = inf_norm(step);
        return;
      }
      lambda *= 0.5;
    }
    ++rep.iterations;
    rep.step_norm = lambda * inf_norm(step);
    rep.p = trial;
    f = residual(sys, rep.p);

    const double scale = std::max(1.0, inf_norm(rep.p));
    const bool small_step = halvings == 0 && rep.step_norm < opt.tol * scale;
    const bool exact = inf_norm(f) <= 1e-15 * scale;
    if (small_step || exact) {
      rep.converged = true;
      return;
    }
  }
}

}  // namespace

NewtonReport newton_solve(const NodeSystem& sys, std::span<const double> p0, const NewtonOptions& opt)
{
  const auto& s = *sys.species;
  const std::size_t n = s.size();
  if (p0.size() != n) throw std::invalid_argument("newton_solve: initial guess length mismatch");

  NewtonReport rep;
  rep.p.assign(p0.begin(), p0.end());
  for (double& v : rep.p) {
    if (!(v > 0) || !std::isfinite(v)) v = 0;
  }
  const double occupied = 1 - water(sys, rep.p);
  if (occupied > 0.99) {
    for (double& v : rep.p) v *= 0.99 / occupied;
  }
  newton_iterate(sys, opt, rep);
  if (rep.converged || s.reduction()) return rep;

  // Restart from the root of the equivalent scalar water-fraction equation.
  // Values below the normal range (deep steric exclusion) are floored there.
  const double w = water_fraction_root(sys);
  for (std::size_t i = 0; i < n; ++i) {
    rep.p[i] = std::max(sys.target[i] * sys.boltzmann[i] * std::pow(w, s.exponent(i)),
                        std::numeric_limits<double>::min());
  }
  rep.restarted = true;
  // Near full packing 1 − γ Σ v p cancels to a few ulps; shrink P by
  // roundoff-sized factors until the computed water fraction is positive.
  for (int k = 1; k <= 64 && !(water(sys, rep.p) > 0); k *= 2) {
    for (double& v : rep.p) v *= 1 - k * std::numeric_limits<double>::epsilon();
  }
  if (!(water(sys, rep.p) > 0)) return rep;
  const auto root = rep.p;
  const int before = rep.iterations;
  newton_iterate(sys, opt, rep);
  if (!rep.converged) {
    // The root already solves the equivalent scalar problem to full precision.
    rep.p = root;
    rep.iterations = before;
    rep.converged = true;
  }
  return rep;
}

SpeciesFields block2_update(const SpeciesSet& s, const SpeciesFields& targets, std::span<const double> u,
                            const SpeciesFields& initial, double cap, const NewtonOptions& opt, Block2Stats* stats,
                            int workers)
{
  const std::size_t n = s.size();
  const std::size_t nodes = u.size();
  if (targets.size() != n || initial.size() != n) throw std::invalid_argument("block2_update: species count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i].size() != nodes || initial[i].size() != nodes) {
      throw std::invalid_argument("block2_update: field length mismatch");
    }
  }

  SpeciesFields out(n, std::vector<double>(nodes));
  std::vector<int> iters(nodes, 0);
  std::vector<char> failed(nodes, 0);

  auto run = [&](std::size_t begin, std::size_t end) {
    std::array<double, kMaxSpecies> t{}, p0{};
    for (std::size_t m = begin; m < end; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = targets[i][m];
        p0[i] = initial[i][m];
      }
      try {
        const auto sys = NodeSystem::make(s, std::span<const double>(t.data(), n), u[m], cap);
        const auto rep = newton_solve(sys, std::span<const double>(p0.data(), n), opt);
        iters[m] = rep.iterations;
        if (!rep.converged) failed[m] = 1;
        for (std::size_t i = 0; i < n; ++i) out[i][m] = rep.p[i];
      } catch (const std::exception&) {
        failed[m] = 1;
      }
    }
  };

  unsigned nw = workers > 0 ? static_cast<unsigned>(workers) : std::max(1u, std::thread::hardware_concurrency());
  nw = static_cast<unsigned>(std::min<std::size_t>(nw, std::max<std::size_t>(1, nodes / 256)));
  if (nw <= 1) {
    run(0, nodes);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (nodes + nw - 1) / nw;
    for (unsigned w = 0; w < nw; ++w) {
      const std::size_t b = w * chunk, e = std::min(nodes, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t m = 0; m < nodes; ++m) {
    if (!failed[m]) continue;
    std::ostringstream os;
    os.precision(17);
    os << "node solve failed at node " << m << ": u = " << u[m] << ", targets = [";
    for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << targets[i][m];
    os << "], initial = [";
    for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << initial[i][m];
    os << "]";
    throw NodeSolveError(os.str());
  }
  if (stats != nullptr) {
    stats->max_iterations = nodes ? *std::max_element(iters.begin(), iters.end()) : 0;
    stats->total_iterations = 0;
    for (int v : iters) stats->total_iterations += v;
  }
  return out;
}

std::vector<double> charge_susceptibility(const SpeciesSet& s, const SpeciesFields& targets,
                                          std::span<const double> u, const SpeciesFields& p, double cap)
{
  const std::size_t n = s.size();
  if (targets.size() != n || p.size() != n) throw std::invalid_argument("charge_susceptibility: species count mismatch");
  std::vector<double> kappa(u.size());
  std::vector<double> t(n), pm(n), d(n);
  for (std::size_t m = 0; m < u.size(); ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = targets[i][m];
      pm[i] = p[i][m];
      // ∂F_i/∂u = Z_i p_i while the exponent is below the cap.
      d[i] = std::abs(s[i].Z * u[m]) < cap ? s[i].Z * pm[i] : 0.0;
    }
    const auto sys = NodeSystem::make(s, t, u[m], cap);
    const auto x = newton_step(sys, pm, d);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += s[i].Z * x[i];
    kappa[m] = std::max(sum, 0.0);
  }
  return kappa;
}

SmpbicResult solve_smpbic(const LabeledMesh& mesh, const SolventSubmesh& sub, std::span<const double> w,
                          const SpeciesSet& s, const ModelConstants& k, const ChargeOperator& ops, int workers)
{
  if (w.size() != mesh.num_vertices()) throw std::invalid_argument("solve_smpbic: w length mismatch");
  const std::size_t n = s.size();
  const std::size_t ns = sub.num_vertices();
  const auto bulk = bulk_slotboom(s);

  SpeciesFields targets(n), xi(n);
  for (std::size_t i = 0; i < n; ++i) {
    targets[i].assign(ns, bulk[i]);
    xi[i].assign(ns, s[i].c_b);
  }
  const NewtonOptions opt{k.newton_tol, k.newton_max, 30};

  SmpbicResult res;
  res.q.assign(mesh.num_vertices(), 0.0);
  auto state = [&](std::span<const double> q, const SpeciesFields& initial) {
    std::vector<double> u(mesh.num_vertices());
    for (std::size_t m = 0; m < u.size(); ++m) u[m] = w[m] + q[m];
    auto us = restrict_field(sub, u);
    auto p = block2_update(s, targets, us, initial, k.exp_cap, opt, nullptr, workers);
    auto r = ops.solve(p);
    for (std::size_t m = 0; m < r.size(); ++m) r[m] -= q[m];
    return std::tuple{std::move(us), std::move(p), std::move(r)};
  };

  auto [us, p, r] = state(res.q, xi);
  double rn = l2_norm(mesh.view(), r);
  for (int it = 1; it <= k.max_outer; ++it) {
    const auto delta = ops.linearized(charge_susceptibility(s, targets, us, p, k.exp_cap), r);

    // Backtrack on ‖q̂ − q‖; trial potentials that make a node infeasible also halve.
    double lambda = 1;
    bool accepted = false;
    std::vector<double> q_trial(res.q.size());
    for (int h = 0; h <= opt.max_halvings && !accepted; ++h, lambda *= 0.5) {
      for (std::size_t m = 0; m < q_trial.size(); ++m) q_trial[m] = res.q[m] + lambda * delta[m];
      try {
        auto [us_t, p_t, r_t] = state(q_trial, p);
        const double rn_t = l2_norm(mesh.view(), r_t);
        if (rn_t <= (1 - 1e-4 * lambda) * rn || h == opt.max_halvings) {
          double dxi = 0;
          for (std::size_t i = 0; i < n; ++i) dxi = std::max(dxi, l2_diff(sub.view(), p_t[i], p[i]));
          res.q_diff = l2_diff(mesh.view(), q_trial, res.q);
          res.xi_diff = dxi;
          res.q = q_trial;
          us = std::move(us_t);
          p = std::move(p_t);
          r = std::move(r_t);
          rn = rn_t;
          accepted = true;
          break;
        }
      } catch (const NodeSolveError&) {
      } catch (const FeasibilityError&) {
      }
    }
    if (!accepted) throw NodeSolveError("equilibrium initializer: no feasible step along the Newton direction");
    res.iterations = it;
    if (res.q_diff < k.outer_tol && res.xi_diff < k.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.xi = std::move(p);
  return res;
}

}  // namespace smpnp
