#include "pro/ssp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "pro/detail/linsolve.hpp"
#include "pro/hitting_time.hpp"

namespace pro {

int SspInstance::total_actions() const {
  int total = 0;
  for (const auto& per_state : actions) total += static_cast<int>(per_state.size());
  return total;
}

std::vector<Violation> validate(const SspInstance& inst) {
  std::vector<Violation> out;
  auto add = [&](const char* code, std::string detail, int state = -1) {
    out.push_back({code, std::move(detail), state, -1});
  };
  const int n = inst.num_states();
  if (n == 0) {
    add("empty", "no states");
    return out;
  }
  if (static_cast<int>(inst.actions.size()) != n) {
    add("bad-actions", "need one action list per state");
    return out;
  }
  bool ids_ok = true;
  if (inst.target < 0 || inst.target >= n) {
    add("bad-target", "target out of range", inst.target);
    ids_ok = false;
  }

  bool structure_ok = true;
  for (int s = 0; s < n; ++s) {
    if (inst.actions[s].empty()) {
      add("no-action", "state has no actions", s);
      structure_ok = false;
      continue;
    }
    for (const SspAction& a : inst.actions[s]) {
      double total = 0.0;
      std::vector<int> seen;
      for (const SspTransition& t : a.out) {
        if (t.to < 0 || t.to >= n) {
          add("transition-range", "transition target out of range", s);
          structure_ok = false;
          continue;
        }
        if (!std::isfinite(t.p) || t.p <= 0.0 || t.p > 1.0) {
          add("bad-probability", "transition probability must lie in (0, 1]", s);
          structure_ok = false;
        }
        if (!std::isfinite(t.c) || t.c < 0.0)
          add("bad-cost", "transition cost must be nonnegative and finite", s);
        if (std::find(seen.begin(), seen.end(), t.to) != seen.end())
          add("duplicate-transition", "action lists the same successor twice", s);
        seen.push_back(t.to);
        total += t.p;
      }
      if (a.out.empty() || std::fabs(total - 1.0) > tol::kRowSum) {
        add("bad-distribution", "action probabilities must sum to 1", s);
        structure_ok = false;
      }
    }
  }

  if (ids_ok && structure_ok) {
    const auto& tacts = inst.actions[inst.target];
    const bool absorbing = tacts.size() == 1 && tacts[0].out.size() == 1 &&
                           tacts[0].out[0].to == inst.target &&
                           std::fabs(tacts[0].out[0].p - 1.0) <= tol::kRowSum &&
                           tacts[0].out[0].c == 0.0;
    if (!absorbing)
      add("target-not-absorbing", "target needs exactly one action: a zero-cost self-loop",
          inst.target);
  }

  // Greatest fixpoint of "some action keeps the walk inside": a state
  // survives while one of its actions has full support in the surviving set.
  // Survivors are exactly the states some policy cuts off from the target.
  if (ids_ok && structure_ok) {
    std::vector<uint8_t> in_set(n, 1);
    in_set[inst.target] = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int s = 0; s < n; ++s) {
        if (!in_set[s]) continue;
        bool can_stay = false;
        for (const SspAction& a : inst.actions[s]) {
          bool inside = true;
          for (const SspTransition& t : a.out) inside = inside && in_set[t.to];
          if (inside) {
            can_stay = true;
            break;
          }
        }
        if (!can_stay) {
          in_set[s] = 0;
          changed = true;
        }
      }
    }
    for (int s = 0; s < n; ++s)
      if (in_set[s]) add("properness", "some policy cuts this state off from the target", s);
  }

  return out;
}

namespace {

void check_policy(const SspInstance& inst, const SspPolicy& policy) {
  if (static_cast<int>(policy.choice.size()) != inst.num_states())
    throw std::invalid_argument("policy must choose one action per state");
  for (int s = 0; s < inst.num_states(); ++s)
    if (policy.choice[s] < 0 || policy.choice[s] >= inst.num_actions(s))
      throw std::invalid_argument("policy picks a missing action at state " + std::to_string(s));
}

double action_value(const SspInstance& inst, int s, int a, const std::vector<double>& values) {
  double v = 0.0;
  for (const SspTransition& t : inst.actions[s][a].out) v += t.p * (t.c + values[t.to]);
  return v;
}

}  // namespace

std::vector<double> evaluate(const SspInstance& inst, const SspPolicy& policy) {
  check_policy(inst, policy);
  const int n = inst.num_states();

  std::vector<int> idx(n, -1);
  int k = 0;
  for (int s = 0; s < n; ++s)
    if (s != inst.target) idx[s] = k++;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int s = 0; s < n; ++s) {
    if (s == inst.target) continue;
    const int i = idx[s];
    trips.emplace_back(i, i, 1.0);
    for (const SspTransition& t : inst.actions[s][policy.choice[s]].out) {
      rhs[i] += t.p * t.c;
      if (t.to != inst.target) trips.emplace_back(i, idx[t.to], -t.p);
    }
  }

  detail::LuSolver solver(k, trips);
  if (!solver.ok())
    throw ImproperPolicyError("policy evaluation system is singular: target unreachable");
  const Eigen::VectorXd j = solver.solve(rhs);
  const double residual = solver.residual(j, rhs);
  if (!j.allFinite() || residual > tol::kHitResidual)
    throw ImproperPolicyError("policy evaluation failed, residual " + std::to_string(residual));

  std::vector<double> values(n, 0.0);
  for (int s = 0; s < n; ++s)
    if (s != inst.target) values[s] = j[idx[s]];
  return values;
}

PiResult policy_iteration(const SspInstance& inst, const SspPolicy& initial, uint64_t guard) {
  check_policy(inst, initial);
  PiResult res;
  res.policy = initial;
  std::vector<double> prev;
  for (;;) {
    res.values = evaluate(inst, res.policy);
    ++res.iterations;

    if (!prev.empty()) {
      for (int s = 0; s < inst.num_states(); ++s)
        if (res.values[s] > prev[s] + tol::band(res.values[s], prev[s]))
          throw std::runtime_error("state value increased between iterations at state " +
                                   std::to_string(s));
    }
    prev = res.values;

    // greedy simultaneous improvement, incumbents win ties
    SspPolicy next = res.policy;
    for (int s = 0; s < inst.num_states(); ++s) {
      if (s == inst.target) continue;
      double best = action_value(inst, s, 0, res.values);
      int best_a = 0;
      for (int a = 1; a < inst.num_actions(s); ++a) {
        const double v = action_value(inst, s, a, res.values);
        if (v < best - tol::band(v, best)) {
          best = v;
          best_a = a;
        }
      }
      const double incumbent = action_value(inst, s, res.policy.choice[s], res.values);
      next.choice[s] = tol::near(incumbent, best) ? res.policy.choice[s] : best_a;
    }

    if (next == res.policy) return res;
    if (static_cast<uint64_t>(res.iterations) >= guard)
      throw std::runtime_error("policy iteration exceeded its guard; numerical fault likely");
    res.policy = next;
  }
}

ViResult value_iteration(const SspInstance& inst, double epsilon, long cap) {
  const int n = inst.num_states();
  ViResult res;
  res.values.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  while (res.iterations < cap) {
    double disp = 0.0;
    for (int s = 0; s < n; ++s) {
      if (s == inst.target) {
        next[s] = 0.0;
        continue;
      }
      double best = action_value(inst, s, 0, res.values);
      for (int a = 1; a < inst.num_actions(s); ++a)
        best = std::min(best, action_value(inst, s, a, res.values));
      next[s] = best;
      disp = std::max(disp, std::fabs(best - res.values[s]));
    }
    res.values.swap(next);
    ++res.iterations;
    res.final_displacement = disp;
    if (disp <= epsilon) {
      res.converged = true;
      break;
    }
  }

  res.greedy.choice.assign(n, 0);
  for (int s = 0; s < n; ++s) {
    if (s == inst.target) continue;
    double best = action_value(inst, s, 0, res.values);
    int best_a = 0;
    for (int a = 1; a < inst.num_actions(s); ++a) {
      const double v = action_value(inst, s, a, res.values);
      if (v < best - tol::band(v, best)) {
        best = v;
        best_a = a;
      }
    }
    res.greedy.choice[s] = best_a;
  }
  return res;
}

SspStats ssp_stats(const SspInstance& inst) {
  SspStats stats;
  long numbers = 0;
  for (const auto& per_state : inst.actions) {
    for (const SspAction& a : per_state) {
      for (const SspTransition& t : a.out) {
        numbers += 2;
        if (t.p > 0.0) stats.eta = std::min(stats.eta, t.p);
      }
    }
  }
  stats.delta_bits = 64.0 * static_cast<double>(numbers);

  // longest shortest path to the target over "possible" transitions; finite
  // whenever the instance passes the properness check
  const int n = inst.num_states();
  std::vector<std::vector<int>> radj(n);
  for (int s = 0; s < n; ++s)
    for (const SspAction& a : inst.actions[s])
      for (const SspTransition& t : a.out)
        if (t.p > 0.0) radj[t.to].push_back(s);
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  if (inst.target >= 0 && inst.target < n) {
    dist[inst.target] = 0;
    queue.push_back(inst.target);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : radj[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  for (int s = 0; s < n; ++s) stats.diameter = std::max(stats.diameter, dist[s]);
  return stats;
}

}  // namespace pro
