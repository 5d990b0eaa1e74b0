#pragma once

// Search engines: Powell's conjugate-directions method with a golden-section
// line search and quadratic penalty wrapper, and a real-coded genetic
// algorithm for five-bar synthesis.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mechharmonic/fivebar.hpp"
#include "mechharmonic/objectives.hpp"

namespace mechharmonic {

using ScalarObjective = std::function<double(const std::vector<double>&)>;
using ConstraintFn = std::function<double(const std::vector<double>&)>;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

struct Bounds {
  std::vector<Interval> intervals;

  std::size_t size() const { return intervals.size(); }

  void validate() const {
    if (intervals.empty()) throw std::invalid_argument("Bounds: empty");
    for (const Interval& iv : intervals) {
      if (!(iv.lower < iv.upper)) {
        throw std::invalid_argument("Bounds: lower must be < upper");
      }
    }
  }

  double clip(std::size_t i, double v) const {
    return std::clamp(v, intervals[i].lower, intervals[i].upper);
  }
};

// ---------------------------------------------------------------------------
// Powell's method
// ---------------------------------------------------------------------------

struct PowellConfig {
  double line_tolerance = 1e-8;      // relative golden-section interval width
  double function_tolerance = 1e-10; // cycle decrease that counts as converged
  int max_iterations = 200;
  int direction_reset_interval = 0;  // cycles between resets to unit basis; 0 = never
  double initial_step = 1.0;         // first bracketing step of each line search
};

struct PowellResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

inline void check_finite(double f, const char* where) {
  if (!std::isfinite(f)) {
    throw std::runtime_error(std::string("powell_run: non-finite objective during ") +
                             where);
  }
}

// Golden-section minimization of g over [lo, hi]; returns best sampled point.
inline std::pair<double, double> golden_section(const std::function<double(double)>& g,
                                                double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = std::min(lo, hi);
  double b = std::max(lo, hi);
  double c = b - (b - a) * kInvPhi;
  double d = a + (b - a) * kInvPhi;
  double fc = g(c);
  double fd = g(d);
  for (int i = 0; i < 200 && (b - a) > tol * (std::abs(c) + std::abs(d)) + 1e-14; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * kInvPhi;
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * kInvPhi;
      fd = g(d);
    }
  }
  return fc < fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

// Minimizes f along x + t*dir. Moves x only when the step improves.
inline void line_minimize(const ScalarObjective& f, std::vector<double>& x, double& fx,
                          const std::vector<double>& dir, const PowellConfig& cfg,
                          long& evaluations) {
  std::vector<double> probe(x.size());
  auto g = [&](double t) {
    for (std::size_t j = 0; j < x.size(); ++j) probe[j] = x[j] + t * dir[j];
    const double v = f(probe);
    ++evaluations;
    check_finite(v, "line search");
    return v;
  };

  // Bracket downhill from t = 0 by golden-ratio expansion.
  constexpr double kGold = 1.618033988749895;
  double ta = 0.0, fa = fx;
  double tb = cfg.initial_step;
  double fb = g(tb);
  if (fb > fa) {
    std::swap(ta, tb);
    std::swap(fa, fb);
  }
  double tc = tb + kGold * (tb - ta);
  double fc = g(tc);
  int expansions = 0;
  while (fc < fb && expansions++ < 100) {
    ta = tb;
    fa = fb;
    tb = tc;
    fb = fc;
    tc = tb + kGold * (tb - ta);
    fc = g(tc);
  }

  const auto [t_best, f_best] = golden_section(g, ta, tc, cfg.line_tolerance);
  if (f_best < fx) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += t_best * dir[j];
    fx = f_best;
  }
}

}  // namespace detail

/// Powell's conjugate-directions minimization: cycles of derivative-free line
/// searches, replacing the direction of largest decrease per Powell's rule.
inline PowellResult powell_run(const ScalarObjective& objective,
                               const std::vector<double>& start,
                               const PowellConfig& config = {}) {
  const std::size_t k = start.size();
  if (k == 0) throw std::invalid_argument("powell_run: empty start vector");

  PowellResult res;
  res.x = start;
  res.value = objective(res.x);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) {
    throw std::invalid_argument("powell_run: objective not finite at start");
  }

  std::vector<std::vector<double>> dirs(k, std::vector<double>(k, 0.0));
  auto reset_directions = [&] {
    for (std::size_t i = 0; i < k; ++i) {
      std::fill(dirs[i].begin(), dirs[i].end(), 0.0);
      dirs[i][i] = 1.0;
    }
  };
  reset_directions();

  std::vector<double> cycle_start = res.x;
  std::vector<double> extrapolated(k);
  std::vector<double> swept_dir(k);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    res.iterations = iter;
    const double f_begin = res.value;
    double largest_drop = 0.0;
    std::size_t drop_index = 0;

    for (std::size_t i = 0; i < k; ++i) {
      const double before = res.value;
      detail::line_minimize(objective, res.x, res.value, dirs[i], config, res.evaluations);
      if (before - res.value > largest_drop) {
        largest_drop = before - res.value;
        drop_index = i;
      }
    }

    if (2.0 * (f_begin - res.value) <=
        config.function_tolerance * (std::abs(f_begin) + std::abs(res.value)) + 1e-25) {
      res.converged = true;
      break;
    }

    // Extrapolate the cycle displacement and consider adopting it.
    for (std::size_t j = 0; j < k; ++j) {
      extrapolated[j] = 2.0 * res.x[j] - cycle_start[j];
      swept_dir[j] = res.x[j] - cycle_start[j];
      cycle_start[j] = res.x[j];
    }
    const double f_extra = objective(extrapolated);
    ++res.evaluations;
    detail::check_finite(f_extra, "extrapolation");
    if (f_extra < f_begin) {
      const double d1 = f_begin - res.value - largest_drop;
      const double d2 = f_begin - f_extra;
      const double t = 2.0 * (f_begin - 2.0 * res.value + f_extra) * d1 * d1 -
                       largest_drop * d2 * d2;
      if (t < 0.0) {
        detail::line_minimize(objective, res.x, res.value, swept_dir, config,
                              res.evaluations);
        dirs[drop_index] = dirs[k - 1];
        dirs[k - 1] = swept_dir;
      }
    }

    if (config.direction_reset_interval > 0 &&
        iter % config.direction_reset_interval == 0) {
      reset_directions();
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Quadratic penalty schedule (SUMT-style)
// ---------------------------------------------------------------------------

struct PenaltySchedule {
  double initial_weight = 10.0;
  double growth = 10.0;
  int outer_iterations = 5;
  double residual_tolerance = 1e-4;  // max constraint residual that counts as converged

  void validate() const {
    if (!(initial_weight > 0.0) || !(growth > 1.0) || outer_iterations < 1) {
      throw std::invalid_argument("PenaltySchedule: invalid parameters");
    }
  }
};

/// F_w = f + w*(sum h^2 + sum max(0,g)^2); one member of the penalty sequence.
inline ScalarObjective penalty_wrap(ScalarObjective objective,
                                    std::vector<ConstraintFn> equalities,
                                    std::vector<ConstraintFn> inequalities, double weight) {
  return [objective = std::move(objective), equalities = std::move(equalities),
          inequalities = std::move(inequalities), weight](const std::vector<double>& x) {
    double value = objective(x);
    for (const ConstraintFn& h : equalities) {
      const double r = h(x);
      value += weight * r * r;
    }
    for (const ConstraintFn& g : inequalities) {
      const double v = std::max(0.0, g(x));
      value += weight * v * v;
    }
    return value;
  };
}

struct PenaltyResult {
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> equality_residuals;    // |h_i| at the returned point
  std::vector<double> inequality_violations; // max(0, g_i)
  double max_residual = 0.0;
  int outer_iterations = 0;
  long evaluations = 0;
  bool converged = false;
};

/// Outer penalty loop: each weight's subproblem is minimized by powell_run,
/// warm-started at the previous minimizer. Non-convergence returns the best
/// iterate seen, flagged.
inline PenaltyResult penalty_minimize(const ScalarObjective& objective,
                                      const std::vector<ConstraintFn>& equalities,
                                      const std::vector<ConstraintFn>& inequalities,
                                      const PenaltySchedule& schedule,
                                      const std::vector<double>& start,
                                      const PowellConfig& powell = {}) {
  schedule.validate();

  auto residuals_at = [&](const std::vector<double>& x) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const ConstraintFn& h : equalities) out.first.push_back(std::abs(h(x)));
    for (const ConstraintFn& g : inequalities) out.second.push_back(std::max(0.0, g(x)));
    return out;
  };
  auto max_of = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (double v : a) m = std::max(m, v);
    for (double v : b) m = std::max(m, v);
    return m;
  };

  auto snapshot = [&](const std::vector<double>& x) {
    PenaltyResult snap;
    snap.x = x;
    snap.objective = objective(x);
    auto [eq, in] = residuals_at(x);
    snap.max_residual = max_of(eq, in);
    snap.equality_residuals = std::move(eq);
    snap.inequality_violations = std::move(in);
    return snap;
  };
  auto preferable = [](const PenaltyResult& a, const PenaltyResult& b) {
    if (a.max_residual != b.max_residual) return a.max_residual < b.max_residual;
    return a.objective < b.objective;
  };

  PenaltyResult best = snapshot(start);
  std::vector<double> x = start;
  long evaluations = 0;
  double weight = schedule.initial_weight;
  for (int outer = 0; outer < schedule.outer_iterations; ++outer) {
    const ScalarObjective penalized =
        penalty_wrap(objective, equalities, inequalities, weight);
    const PowellResult inner = powell_run(penalized, x, powell);
    x = inner.x;
    evaluations += inner.evaluations;
    const PenaltyResult candidate = snapshot(x);
    if (preferable(candidate, best)) best = candidate;
    weight *= schedule.growth;
  }
  best.evaluations = evaluations;
  best.outer_iterations = schedule.outer_iterations;
  best.converged = best.max_residual <= schedule.residual_tolerance;
  return best;
}

// ---------------------------------------------------------------------------
// Real-coded genetic algorithm for five-bar synthesis
// ---------------------------------------------------------------------------

// Design vector layout for the five-bar search.
inline constexpr std::size_t kFiveBarParamCount = 8;
using FiveBarParams = std::array<double, kFiveBarParamCount>;  // p,q,r,s,cvx,cvy,sx,sy

inline FiveBarGeometry geometry_from_params(const FiveBarParams& v) {
  FiveBarGeometry geom;
  geom.p = v[0];
  geom.q = v[1];
  geom.r = v[2];
  geom.s = v[3];
  geom.cv_pivot = {v[4], v[5]};
  geom.servo_pivot = {v[6], v[7]};
  return geom;
}

struct GaConfig {
  int population_size = 50;
  int max_generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  double mutation_scale = 0.05;   // sigma as a fraction of each parameter range
  double mutation_anneal = 0.0;   // sigma decay exponent over the run; 0 = constant
  int tournament_size = 3;
  int elite_count = 2;
  double blend_alpha = 0.5;      // BLX-alpha crossover expansion
  double line_blend_ratio = 0.5; // fraction of crossovers blending along the parent axis
  std::uint64_t seed = 1;
  double error_threshold = -1.0;  // < 0: 2% of the path bounding-box diagonal
  double link_ratio_cap = 5.0;

  void validate() const {
    if (population_size < 2 || max_generations < 1 || tournament_size < 1 ||
        elite_count < 0 || elite_count >= population_size) {
      throw std::invalid_argument("GaConfig: invalid sizes");
    }
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
        mutation_rate > 1.0 || mutation_scale < 0.0 || mutation_anneal < 0.0) {
      throw std::invalid_argument("GaConfig: rates must lie in [0,1]");
    }
    if (blend_alpha < 0.0 || line_blend_ratio < 0.0 || line_blend_ratio > 1.0) {
      throw std::invalid_argument("GaConfig: invalid crossover parameters");
    }
    if (!(link_ratio_cap > 0.0)) {
      throw std::invalid_argument("GaConfig: link_ratio_cap must be positive");
    }
  }
};

struct FiveBarProblem {
  Bounds bounds;  // exactly kFiveBarParamCount intervals
  PathSpec path;
  ObjectiveWeights weights;
  ObjectiveOptions options;
  std::vector<FiveBarParams> seed_individuals;  // injected verbatim (clipped to bounds)
};

struct GaHistoryRow {
  int generation = 0;
  ObjectiveBreakdown best;
};

struct GaResult {
  FiveBarParams best_params{};
  FiveBarGeometry best_geometry;
  ObjectiveBreakdown best_breakdown;
  double best_error_sum = 0.0;
  int best_mobility = 0;
  std::vector<GaHistoryRow> history;
  int generations_run = 0;
  std::string termination_reason;
};

namespace detail {

// Self-contained uniform/gaussian mappers keep runs reproducible regardless
// of the standard library's distribution implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(double p) { return uniform01() < p; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return radius * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct GaIndividual {
  FiveBarParams params{};
  ObjectiveBreakdown breakdown;
  double error_sum = 0.0;
  int mobility = 0;
  double max_link = 0.0;
};

inline GaIndividual evaluate_individual(const FiveBarParams& params,
                                        const FiveBarProblem& problem) {
  GaIndividual ind;
  ind.params = params;
  const FiveBarGeometry geom = geometry_from_params(params);
  ind.breakdown = composite_objective(geom, problem.path, problem.weights, problem.options);
  double err_sum = 0.0;
  for (std::size_t i = 0; i < problem.path.size(); ++i) {
    err_sum +=
        driving_dyad_solve(geom, problem.path.cv_angle(i), problem.path.points[i]).point_error;
  }
  ind.error_sum = err_sum;
  ind.mobility = mobility_count(geom, problem.path);
  ind.max_link = std::max({geom.p, geom.q, geom.r, geom.s, geom.ground_length()});
  return ind;
}

}  // namespace detail

inline double default_error_threshold(const PathSpec& path) {
  double min_x = path.points[0].x, max_x = min_x;
  double min_y = path.points[0].y, max_y = min_y;
  for (const Point2& pt : path.points) {
    min_x = std::min(min_x, pt.x);
    max_x = std::max(max_x, pt.x);
    min_y = std::min(min_y, pt.y);
    max_y = std::max(max_y, pt.y);
  }
  return 0.02 * std::hypot(max_x - min_x, max_y - min_y);
}

/// Seeded GA minimizing the composite objective. Terminates when the best
/// feasible individual tracks the path below the error threshold with every
/// link within ratio_cap times the CV crank, or at the generation cap.
inline GaResult ga_run(const FiveBarProblem& problem, const GaConfig& config) {
  config.validate();
  problem.bounds.validate();
  if (problem.bounds.size() != kFiveBarParamCount) {
    throw std::invalid_argument("ga_run: five-bar problems take 8 bounded parameters");
  }
  problem.path.validate();

  const double threshold = config.error_threshold >= 0.0
                               ? config.error_threshold
                               : default_error_threshold(problem.path);

  detail::SeededRng rng(config.seed);
  auto clip_params = [&](FiveBarParams v) {
    for (std::size_t j = 0; j < kFiveBarParamCount; ++j) v[j] = problem.bounds.clip(j, v[j]);
    return v;
  };

  std::vector<detail::GaIndividual> population;
  population.reserve(static_cast<std::size_t>(config.population_size));
  for (const FiveBarParams& seeded : problem.seed_individuals) {
    if (population.size() >= static_cast<std::size_t>(config.population_size)) break;
    population.push_back(detail::evaluate_individual(clip_params(seeded), problem));
  }
  while (population.size() < static_cast<std::size_t>(config.population_size)) {
    FiveBarParams v{};
    for (std::size_t j = 0; j < kFiveBarParamCount; ++j) {
      v[j] = rng.uniform(problem.bounds.intervals[j].lower, problem.bounds.intervals[j].upper);
    }
    population.push_back(detail::evaluate_individual(v, problem));
  }

  auto better = [](const detail::GaIndividual& a, const detail::GaIndividual& b) {
    return a.breakdown.composite < b.breakdown.composite;
  };
  auto best_index = [&](const std::vector<detail::GaIndividual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (better(pop[i], pop[best])) best = i;
    }
    return best;
  };
  auto meets_termination = [&](const detail::GaIndividual& ind) {
    return ind.mobility == 0 && ind.error_sum < threshold &&
           ind.max_link <= config.link_ratio_cap * ind.params[0];
  };

  GaResult result;
  std::size_t champion = best_index(population);
  result.history.push_back({0, population[champion].breakdown});

  auto finish = [&](int generations, std::string reason) {
    const detail::GaIndividual& win = population[champion];
    result.best_params = win.params;
    result.best_geometry = geometry_from_params(win.params);
    result.best_breakdown = win.breakdown;
    result.best_error_sum = win.error_sum;
    result.best_mobility = win.mobility;
    result.generations_run = generations;
    result.termination_reason = std::move(reason);
    return result;
  };

  if (meets_termination(population[champion])) {
    return finish(0, "threshold");
  }

  std::vector<std::size_t> order(population.size());
  for (int gen = 1; gen <= config.max_generations; ++gen) {
    // Non-uniform mutation: sigma tapers toward the generation cap but
    // keeps a small exploration floor.
    const double progress = static_cast<double>(gen - 1) /
                            static_cast<double>(config.max_generations);
    const double sigma_scale =
        config.mutation_scale *
        std::max(std::pow(1.0 - progress, config.mutation_anneal), 0.05);
    // Elites pass through unchanged.
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (population[a].breakdown.composite != population[b].breakdown.composite) {
        return population[a].breakdown.composite < population[b].breakdown.composite;
      }
      return a < b;
    });

    std::vector<detail::GaIndividual> next;
    next.reserve(population.size());
    for (int e = 0; e < config.elite_count; ++e) {
      next.push_back(population[order[static_cast<std::size_t>(e)]]);
    }

    auto tournament = [&]() -> const detail::GaIndividual& {
      std::size_t winner = rng.index(population.size());
      for (int t = 1; t < config.tournament_size; ++t) {
        const std::size_t challenger = rng.index(population.size());
        if (better(population[challenger], population[winner])) winner = challenger;
      }
      return population[winner];
    };

    while (next.size() < population.size()) {
      const detail::GaIndividual& parent_a = tournament();
      const detail::GaIndividual& parent_b = tournament();
      FiveBarParams child = parent_a.params;
      if (rng.chance(config.crossover_rate)) {
        if (rng.chance(config.line_blend_ratio)) {
          // Line blend: one shared factor, moving along the parent axis.
          const double u = rng.uniform(-config.blend_alpha, 1.0 + config.blend_alpha);
          for (std::size_t j = 0; j < kFiveBarParamCount; ++j) {
            child[j] = parent_a.params[j] + u * (parent_b.params[j] - parent_a.params[j]);
          }
        } else {
          // Blend crossover: each gene sampled from the stretched parent span.
          for (std::size_t j = 0; j < kFiveBarParamCount; ++j) {
            const double lo = std::min(parent_a.params[j], parent_b.params[j]);
            const double hi = std::max(parent_a.params[j], parent_b.params[j]);
            const double pad = config.blend_alpha * (hi - lo);
            child[j] = rng.uniform(lo - pad, hi + pad);
          }
        }
      }
      for (std::size_t j = 0; j < kFiveBarParamCount; ++j) {
        if (rng.chance(config.mutation_rate)) {
          const double range =
              problem.bounds.intervals[j].upper - problem.bounds.intervals[j].lower;
          child[j] += sigma_scale * range * rng.gaussian();
        }
      }
      next.push_back(detail::evaluate_individual(clip_params(child), problem));
    }

    population = std::move(next);
    champion = best_index(population);
    result.history.push_back({gen, population[champion].breakdown});
    if (meets_termination(population[champion])) {
      return finish(gen, "threshold");
    }
  }
  return finish(config.max_generations, "generation-cap");
}

}  // namespace mechharmonic
