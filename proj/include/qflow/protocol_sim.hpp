#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qflow/error.hpp"
#include "qflow/fidelity.hpp"
#include "qflow/path_extraction.hpp"
#include "qflow/rng.hpp"
#include "qflow/topology.hpp"

namespace qflow {

enum class Scheduling { kSequential, kRoundRobin };

inline const char* to_string(Scheduling s) {
  return s == Scheduling::kSequential ? "sequential" : "round-robin";
}

struct SimulationConfig {
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  // Swap success probability for simulate_chain; simulate_network uses the
  // graph's own q.
  double q = 1.0;
  Scheduling scheduling = Scheduling::kSequential;
  // Elementary fidelity for simulate_chain's Werner tracking.
  double elementary_fidelity = 1.0;
  // Number of interleaved rounds per second under round-robin scheduling.
  std::size_t rounds = 10;
  unsigned threads = 1;
};

// Expected rate of prepare-and-swap on a chain: q^{n-1} * min C.
inline double analytic_chain_rate(std::span<const double> capacities, double q) {
  if (capacities.empty()) throw InputError("chain needs at least one link");
  if (!(q > 0.0 && q <= 1.0)) throw InputError("swap success probability must lie in (0, 1]");
  const double cmin = *std::min_element(capacities.begin(), capacities.end());
  return std::pow(q, static_cast<double>(capacities.size()) - 1.0) * cmin;
}

// Average memory hold time per second of operation for a path carrying
// `rate`: (rate / q^{|p|-1}) / min capacity along the path.
inline double storage_time_bound(std::span<const EdgeIndex> path, double rate, const NetworkGraph& g, double q) {
  if (path.empty()) throw InputError("empty path");
  if (rate <= 0.0) return 0.0;
  double cmin = g.capacity(path.front());
  for (EdgeIndex e : path) cmin = std::min(cmin, g.capacity(e));
  return rate / std::pow(q, static_cast<double>(path.size()) - 1.0) / cmin;
}

struct LinkShare {
  // Index into the flattened (demand-major) path list.
  std::size_t path;
  // Fraction of each second the link spends on this path.
  double share;
  // Elementary pairs per second the path needs on this link.
  double elementary_rate;
};

struct LinkSchedule {
  std::vector<std::vector<LinkShare>> per_edge;
  std::vector<const ExtractedPath*> paths;

  double share_sum(EdgeIndex e) const {
    double s = 0.0;
    for (const auto& l : per_edge.at(e)) s += l.share;
    return s;
  }
};

// Splits each link's second among the paths using it: path p needs
// r_p / q^{|p|-1} elementary pairs per second, i.e. a share of that over C.
// Throws InfeasibleError if some link would need more than one second.
inline LinkSchedule build_link_schedule(const PathAssignment& pa, const NetworkGraph& g, double q,
                                        double tol_feas = 1e-7) {
  LinkSchedule s;
  s.per_edge.resize(g.num_edges());
  for (const auto& demand_paths : pa.per_demand) {
    for (const auto& p : demand_paths) {
      const std::size_t id = s.paths.size();
      s.paths.push_back(&p);
      const double elementary = p.rate / std::pow(q, static_cast<double>(p.hops) - 1.0);
      for (EdgeIndex e : p.base_edges) s.per_edge[e].push_back({id, elementary / g.capacity(e), elementary});
    }
  }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    if (s.share_sum(e) > 1.0 + tol_feas) {
      throw InfeasibleError("link (" + g.node_id(g.edge(e).from) + "," + g.node_id(g.edge(e).to) +
                            ") is oversubscribed: shares sum to " + std::to_string(s.share_sum(e)));
    }
  }
  return s;
}

struct PathSimResult {
  std::size_t demand = 0;
  std::size_t path = 0;
  std::size_t length = 0;
  std::vector<NodeIndex> nodes;
  double analytic_rate = 0.0;
  double empirical_rate = 0.0;
  double standard_error = 0.0;
  // Mean fidelity over delivered pairs; empty if none were delivered.
  std::optional<double> mean_fidelity;
  double storage_bound = 0.0;
  // Time within each second by which the path's last elementary pair is
  // scheduled, given the scheduling discipline.
  double ready_time = 0.0;
};

struct SimulationReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  Scheduling scheduling = Scheduling::kSequential;
  std::vector<PathSimResult> paths;
};

namespace detail {

// Pairwise summation keeps the aggregate independent of thread count.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// One simulated path: each second it gets `candidates_mean` elementary
// pairs at its bottleneck (floor plus a Bernoulli for the fraction), each
// turning into an end-to-end pair iff all `swaps` independent swaps succeed.
struct PathJob {
  double candidates_mean;
  std::size_t swaps;
  double q;
};

// Per-trial success counts for every job; trial t of job k draws from
// CounterRng(seed, t, k), so the result does not depend on `threads`.
inline std::vector<std::vector<double>> run_trials(const std::vector<PathJob>& jobs, std::size_t trials,
                                                   std::uint64_t seed, unsigned threads) {
  std::vector<std::vector<double>> counts(jobs.size(), std::vector<double>(trials, 0.0));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const auto& job = jobs[k];
      const double whole = std::floor(job.candidates_mean);
      const double frac = job.candidates_mean - whole;
      const auto base = static_cast<std::uint64_t>(whole);
      for (std::size_t t = begin; t < end; ++t) {
        CounterRng rng(seed, t, k);
        std::uint64_t candidates = base;
        if (frac > 0.0 && rng.bernoulli(frac)) ++candidates;
        std::uint64_t delivered = 0;
        for (std::uint64_t c = 0; c < candidates; ++c) {
          bool ok = true;
          for (std::size_t s = 0; s < job.swaps && ok; ++s) ok = rng.bernoulli(job.q);
          if (ok) ++delivered;
        }
        counts[k][t] = static_cast<double>(delivered);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, trials))));
  if (n == 1) {
    work(0, trials);
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) {
      pool.emplace_back(work, trials * i / n, trials * (i + 1) / n);
    }
    for (auto& th : pool) th.join();
  }
  return counts;
}

inline void summarize(std::span<const double> counts, PathSimResult& out, double fidelity_per_pair) {
  const double n = static_cast<double>(counts.size());
  const double mean = pairwise_sum(counts) / n;
  std::vector<double> sq(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) sq[i] = (counts[i] - mean) * (counts[i] - mean);
  const double var = counts.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  out.empirical_rate = mean;
  out.standard_error = std::sqrt(var / n);
  // Werner tracking: every delivered pair over |p| links has weight w^|p|.
  if (mean > 0.0) out.mean_fidelity = fidelity_per_pair;
}

inline double werner_weight(double fidelity) { return (4.0 * fidelity - 1.0) / 3.0; }

inline double delivered_fidelity(double elementary_fidelity, std::size_t links) {
  double w = 1.0;
  for (std::size_t i = 0; i < links; ++i) w = swap_compose(w, werner_weight(elementary_fidelity));
  return werner_to_fidelity(w);
}

}  // namespace detail

// Monte-Carlo prepare-and-swap on a chain with the given link capacities.
inline SimulationReport simulate_chain(std::span<const double> capacities, const SimulationConfig& cfg) {
  if (cfg.trials == 0) throw InputError("trials must be positive");
  const double analytic = analytic_chain_rate(capacities, cfg.q);
  const double cmin = *std::min_element(capacities.begin(), capacities.end());
  const auto counts = detail::run_trials({{cmin, capacities.size() - 1, cfg.q}}, cfg.trials, cfg.seed, cfg.threads);

  SimulationReport rep{cfg.trials, cfg.seed, cfg.scheduling, {}};
  PathSimResult r;
  r.length = capacities.size();
  r.analytic_rate = analytic;
  r.storage_bound = analytic / std::pow(cfg.q, static_cast<double>(capacities.size()) - 1.0) / cmin;
  r.ready_time = 1.0;
  detail::summarize(counts[0], r, detail::delivered_fidelity(cfg.elementary_fidelity, capacities.size()));
  rep.paths.push_back(std::move(r));
  return rep;
}

// Monte-Carlo prepare-and-swap for every path of an assignment, with links
// time-shared per build_link_schedule. Uses the graph's q and F.
inline SimulationReport simulate_network(const PathAssignment& pa, const NetworkGraph& g,
                                         const SimulationConfig& cfg) {
  if (cfg.trials == 0) throw InputError("trials must be positive");
  if (cfg.rounds == 0) throw InputError("round-robin needs at least one round");
  const double q = g.swap_success();
  const LinkSchedule sched = build_link_schedule(pa, g, q);

  // Slot layout: on each link, paths take consecutive slices in path order;
  // round-robin repeats the layout scaled into each of `rounds` rounds.
  std::vector<double> ready(sched.paths.size(), 0.0);
  for (const auto& shares : sched.per_edge) {
    double offset = 0.0;
    for (const auto& s : shares) {
      offset += s.share;
      const double end = cfg.scheduling == Scheduling::kSequential
                             ? offset
                             : (static_cast<double>(cfg.rounds) - 1.0 + offset) / static_cast<double>(cfg.rounds);
      ready[s.path] = std::max(ready[s.path], end);
    }
  }

  std::vector<detail::PathJob> jobs;
  for (const ExtractedPath* p : sched.paths) {
    jobs.push_back({p->rate / std::pow(q, static_cast<double>(p->hops) - 1.0), p->hops - 1, q});
  }
  const auto counts = detail::run_trials(jobs, cfg.trials, cfg.seed, cfg.threads);

  SimulationReport rep{cfg.trials, cfg.seed, cfg.scheduling, {}};
  std::size_t id = 0;
  for (std::size_t i = 0; i < pa.per_demand.size(); ++i) {
    for (std::size_t k = 0; k < pa.per_demand[i].size(); ++k, ++id) {
      const auto& p = pa.per_demand[i][k];
      PathSimResult r;
      r.demand = i;
      r.path = k;
      r.length = p.hops;
      r.nodes = p.nodes(g);
      r.analytic_rate = p.rate;
      r.storage_bound = storage_time_bound(p.base_edges, p.rate, g, q);
      r.ready_time = ready[id];
      detail::summarize(counts[id], r, detail::delivered_fidelity(g.elementary_fidelity(), p.hops));
      rep.paths.push_back(std::move(r));
    }
  }
  return rep;
}

}  // namespace qflow
