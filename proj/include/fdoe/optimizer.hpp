#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "fdoe/errors.hpp"
#include "fdoe/model.hpp"
#include "fdoe/objective.hpp"

namespace fdoe {

/// Search controls shared by coordinate_exchange and multi_start.
struct SearchConfig {
  int nsd = 1;                // number of starting designs
  double tol = 0.0001;        // absolute per-sweep improvement threshold
  double dlbound = -1.0;
  double dubound = 1.0;
  int max_sweeps = 200;
  std::uint64_t seed = 0;
  int workers = 1;
  std::function<void(int start, int sweep, double objective)> progress;
};

struct ExchangeResult {
  Design design;
  double objective = 0.0;
  int sweeps = 0;
  std::vector<double> trace;  // objective after each accepted move
};

struct SearchResult {
  Design design;
  double objval = 0.0;
  int nits = 0;     // sweeps of the winning repetition
  int bestrep = 1;  // 1-based repetition index, lowest on ties
  double elapsed_seconds = 0.0;
  std::vector<Design> allstartd;
  std::vector<Design> alldesigns;
  std::vector<double> allobjvals;
  std::vector<int> allsweeps;
  std::vector<std::vector<double>> alltraces;
};

/// Independent uniform draws on [lo, hi] for every coefficient, filled factor
/// by factor, row by row.
inline Design random_start(const std::vector<BasisSpec>& factor_specs, int n_runs, double lo,
                           double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Design design;
  for (const BasisSpec& spec : factor_specs) {
    Eigen::MatrixXd m(n_runs, spec.dimension());
    for (int i = 0; i < m.rows(); ++i)
      for (int l = 0; l < m.cols(); ++l) m(i, l) = unif(rng);
    design.coef.push_back(std::move(m));
  }
  return design;
}

namespace detail {

// Golden-section scan of one coordinate over [lo, hi], refined to a bracket
// of width 1e-6, with both endpoints probed as well. Returns the best probed
// (value, objective) pair in the criterion direction.
template <CoordinateObjective Obj>
std::pair<double, double> line_search(Obj& obj, CoordMove move, double lo, double hi) {
  const CriterionSpec& crit = obj.criterion();
  double best_v = lo;
  auto eval = [&](double v) {
    move.value = v;
    return obj.probe(move);
  };
  double best_o = eval(lo);
  if (const double o = eval(hi); crit.better(o, best_o)) {
    best_o = o;
    best_v = hi;
  }
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  auto consider = [&](double v, double o) {
    if (crit.better(o, best_o)) {
      best_o = o;
      best_v = v;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  while (b - a > 1e-6) {
    if (crit.better(f1, f2)) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
      consider(x2, f2);
    }
  }
  return {best_v, best_o};
}

}  // namespace detail

/// Coordinate exchange: sweep every coefficient in fixed order (factors in
/// declaration order, runs ascending, coefficients ascending), replacing it
/// with the best value found by a golden-section scan of [dlbound, dubound]
/// whenever that strictly improves the objective. Stops when a full sweep
/// improves the objective by less than `tol`, or at `max_sweeps`.
///
/// Throws InfeasibleError if the objective is still non-finite after the
/// first sweep.
template <CoordinateObjective Obj>
ExchangeResult coordinate_exchange(Obj& obj, const Design& start, const SearchConfig& config,
                                   int start_index = 1) {
  const CriterionSpec& crit = obj.criterion();
  double current = obj.initialize(start);
  ExchangeResult result;
  result.trace.push_back(current);

  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    result.sweeps = sweep;
    const double sweep_begin = current;
    for (int j = 0; j < static_cast<int>(start.coef.size()); ++j) {
      for (int i = 0; i < start.coef[j].rows(); ++i) {
        for (int l = 0; l < start.coef[j].cols(); ++l) {
          CoordMove move{j, i, l, 0.0};
          auto [value, objective] =
              detail::line_search(obj, move, config.dlbound, config.dubound);
          if (crit.better(objective, current)) {
            move.value = value;
            current = obj.commit(move);
            result.trace.push_back(current);
          }
        }
      }
    }
    if (config.progress) config.progress(start_index, sweep, current);
    if (sweep == 1 && !std::isfinite(current))
      throw InfeasibleError("coordinate exchange found no feasible design from start " +
                                std::to_string(start_index),
                            start_index);
    const double gain = crit.maximize() ? current - sweep_begin : sweep_begin - current;
    if (!(gain >= config.tol)) break;
  }

  result.design = obj.design();
  result.objective = current;
  return result;
}

/// Runs coordinate_exchange from `nsd` starting designs (random unless
/// supplied) and keeps the best final design. Every start draws its own RNG
/// stream derived from (seed, start index), and each worker owns a private
/// objective from `make_objective`, so the result is identical for any
/// `workers` value. Starts whose exchange never becomes feasible are recorded
/// with the sentinel objective; if all of them are infeasible an
/// InfeasibleError is thrown.
template <class ObjFactory>
SearchResult multi_start(ObjFactory&& make_objective, const SearchConfig& config,
                         const std::vector<BasisSpec>& factor_specs, int n_runs,
                         const std::vector<Design>* starts = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.nsd < 1) throw ConfigError("nsd must be at least 1");
  if (!(config.dlbound < config.dubound)) throw ConfigError("dlbound must be below dubound");
  if (!(config.tol > 0.0)) throw ConfigError("tol must be positive");

  SearchResult result;
  if (starts) {
    if (static_cast<int>(starts->size()) != config.nsd)
      throw ConfigError("expected " + std::to_string(config.nsd) + " starting designs, got " +
                        std::to_string(starts->size()));
    for (const Design& d : *starts) {
      check_design_shape(d, factor_specs, n_runs);
      check_design_bounds(d, config.dlbound, config.dubound);
    }
    result.allstartd = *starts;
  } else {
    for (int s = 0; s < config.nsd; ++s) {
      std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                        static_cast<std::uint32_t>(config.seed >> 32),
                        static_cast<std::uint32_t>(s)};
      std::mt19937_64 rng(seq);
      result.allstartd.push_back(
          random_start(factor_specs, n_runs, config.dlbound, config.dubound, rng));
    }
  }

  result.alldesigns.resize(config.nsd);
  result.allobjvals.resize(config.nsd);
  result.allsweeps.resize(config.nsd);
  result.alltraces.resize(config.nsd);
  std::vector<int> feasible(config.nsd, 1);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run_one = [&](int s) {
    auto objective = make_objective();
    try {
      ExchangeResult r =
          coordinate_exchange(objective, result.allstartd[s], config, s + 1);
      result.alldesigns[s] = std::move(r.design);
      result.allobjvals[s] = r.objective;
      result.allsweeps[s] = r.sweeps;
      result.alltraces[s] = std::move(r.trace);
    } catch (const InfeasibleError&) {
      feasible[s] = 0;
      result.alldesigns[s] = result.allstartd[s];
      result.allobjvals[s] = objective.criterion().infeasible();
      result.allsweeps[s] = 1;
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const int workers = std::max(1, config.workers);
  if (workers == 1 || config.nsd == 1) {
    for (int s = 0; s < config.nsd; ++s) run_one(s);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int active = std::min(workers, config.nsd);
    pool.reserve(active);
    for (int w = 0; w < active; ++w)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < config.nsd; s = next.fetch_add(1)) run_one(s);
      });
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const CriterionSpec crit = make_objective().criterion();
  int best = -1;
  for (int s = 0; s < config.nsd; ++s) {
    if (!feasible[s]) continue;
    if (best < 0 || crit.better(result.allobjvals[s], result.allobjvals[best])) best = s;
  }
  if (best < 0)
    throw InfeasibleError("all " + std::to_string(config.nsd) + " starting designs infeasible",
                          0);
  result.design = result.alldesigns[best];
  result.objval = result.allobjvals[best];
  result.nits = result.allsweeps[best];
  result.bestrep = best + 1;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace fdoe
