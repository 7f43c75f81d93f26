#include "pro/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "pro/hitting_time.hpp"
#include "pro/json_io.hpp"
#include "pro/reductions.hpp"
#include "pro/tolerances.hpp"

namespace pro {

namespace {

using nlohmann::json;

SupportGraph draw_graph(const BenchConfig& cfg, Rng& rng, uint64_t seed) {
  const int n = rng.range(cfg.n_min, cfg.n_max);
  if (cfg.family == "er") return erdos_renyi(n, rng.uniform(cfg.p_min, cfg.p_max), seed);
  if (cfg.family == "power-law") {
    PowerLawOptions opts;
    opts.exponent = cfg.exponent;
    return power_law(n, seed, opts);
  }
  throw std::invalid_argument("unknown instance family: " + cfg.family);
}

void parallel_for(long begin, long end, int workers, const std::function<void(long)>& body) {
  if (end <= begin) return;
  if (workers <= 1 || end - begin == 1) {
    for (long i = begin; i < end; ++i) body(i);
    return;
  }
  std::atomic<long> next{begin};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= end) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const long span = end - begin;
  const int spawned = static_cast<int>(std::min<long>(workers, span));
  pool.reserve(spawned);
  for (int t = 0; t < spawned; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Stable across processes, unlike std::hash.
uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_key(const BenchConfig& cfg) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%s|%d|%d|%.17g|%.17g|%.17g|%d|%ld|%llu|%d|%.17g|%d|%d|%d",
                cfg.family.c_str(), cfg.n_min, cfg.n_max, cfg.p_min, cfg.p_max, cfg.exponent,
                cfg.f, cfg.count, static_cast<unsigned long long>(cfg.seed),
                static_cast<int>(cfg.mode), cfg.zapping ? *cfg.zapping : -1.0,
                cfg.fail_at ? *cfg.fail_at : -1, cfg.random_starts,
                static_cast<int>(cfg.sense));
  std::string key(buf);
  for (const std::string& file : cfg.inject) key += "|" + file;
  char out[32];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return out;
}

std::filesystem::path ensure_out_dir(const BenchConfig& cfg) {
  std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(".")
                                                  : std::filesystem::path(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const char* mode_name(FreeEdgeMode m) {
  switch (m) {
    case FreeEdgeMode::SingleSource: return "single-source";
    case FreeEdgeMode::SourceVs: return "source-vs";
    case FreeEdgeMode::SourceVsAndW: return "source-vs-w";
    default: return "uniform";
  }
}

FreeEdgeMode mode_from_name(const std::string& s) {
  if (s == "single-source") return FreeEdgeMode::SingleSource;
  if (s == "source-vs") return FreeEdgeMode::SourceVs;
  if (s == "source-vs-w") return FreeEdgeMode::SourceVsAndW;
  if (s == "uniform") return FreeEdgeMode::Uniform;
  throw std::invalid_argument("unknown free-edge mode: " + s);
}

}  // namespace

json to_json(const BenchConfig& cfg) {
  json j;
  j["family"] = cfg.family;
  j["n_min"] = cfg.n_min;
  j["n_max"] = cfg.n_max;
  j["p_min"] = cfg.p_min;
  j["p_max"] = cfg.p_max;
  j["exponent"] = cfg.exponent;
  j["f"] = cfg.f;
  j["count"] = cfg.count;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["zapping"] = cfg.zapping ? json(*cfg.zapping) : json(nullptr);
  j["sense"] = cfg.sense == Sense::MinimizePagerank ? "min" : "max";
  j["workers"] = cfg.workers;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["out_dir"] = cfg.out_dir;
  j["fail_at"] = cfg.fail_at ? json(*cfg.fail_at) : json(nullptr);
  j["inject"] = cfg.inject;
  j["random_starts"] = cfg.random_starts;
  return j;
}

void apply_config_json(BenchConfig& cfg, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  if (j.contains("family")) cfg.family = j.at("family").get<std::string>();
  if (j.contains("n_min")) cfg.n_min = j.at("n_min").get<int>();
  if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<int>();
  if (j.contains("p_min")) cfg.p_min = j.at("p_min").get<double>();
  if (j.contains("p_max")) cfg.p_max = j.at("p_max").get<double>();
  if (j.contains("exponent")) cfg.exponent = j.at("exponent").get<double>();
  if (j.contains("f")) cfg.f = j.at("f").get<int>();
  if (j.contains("count")) cfg.count = j.at("count").get<long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("mode")) cfg.mode = mode_from_name(j.at("mode").get<std::string>());
  if (j.contains("zapping")) {
    if (j.at("zapping").is_null())
      cfg.zapping.reset();
    else
      cfg.zapping = j.at("zapping").get<double>();
  }
  if (j.contains("sense"))
    cfg.sense = j.at("sense").get<std::string>() == "min" ? Sense::MinimizePagerank
                                                          : Sense::MaximizePagerank;
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  if (j.contains("checkpoint_every")) cfg.checkpoint_every = j.at("checkpoint_every").get<long>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("fail_at")) {
    if (j.at("fail_at").is_null())
      cfg.fail_at.reset();
    else
      cfg.fail_at = j.at("fail_at").get<int>();
  }
  if (j.contains("inject")) cfg.inject = j.at("inject").get<std::vector<std::string>>();
  if (j.contains("random_starts")) cfg.random_starts = j.at("random_starts").get<int>();
}

GproInstance draw_instance(const BenchConfig& cfg, int f, long index) {
  const uint64_t root = derive_seed(cfg.seed, static_cast<uint64_t>(index));
  std::string last = "no attempt made";
  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(derive_seed(root, 2 * attempt));
    SampleOptions opts;
    opts.mode = cfg.mode;
    opts.zapping = cfg.zapping;
    try {
      const SupportGraph g = draw_graph(cfg, rng, derive_seed(root, 2 * attempt + 1));
      return sample_free_edges(g, f, opts, derive_seed(root, 1000 + attempt));
    } catch (const std::exception& ex) {
      last = ex.what();
    }
  }
  throw std::runtime_error("no valid instance for index " + std::to_string(index) + ": " + last);
}

int resolve_workers(const BenchConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv("PRO_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<SweepRow> sweep_f(const BenchConfig& cfg, int f_min, int f_max) {
  std::vector<SweepRow> rows;
  const int workers = resolve_workers(cfg);
  for (int f = f_min; f <= f_max; ++f) {
    SweepRow row;
    row.f = f;
    std::vector<int> iters(static_cast<size_t>(cfg.count), -1);
    parallel_for(0, cfg.count, workers, [&](long i) {
      GproInstance inst;
      try {
        // distinct index block per f so the rows are independent draws
        inst = draw_instance(cfg, f, i + static_cast<long>(f) * 1000003L);
      } catch (const std::runtime_error&) {
        return;
      }
      const PriTrace t = solve(inst, all_active_policy(inst), cfg.sense);
      // the growth curve tracks evaluation passes, so a run with nothing to
      // improve still counts 1
      iters[static_cast<size_t>(i)] = t.iteration_count;
    });
    long total = 0;
    for (int v : iters) {
      if (v < 0) {
        ++row.generation_failures;
        continue;
      }
      ++row.count;
      total += v;
      row.max_iters = std::max(row.max_iters, v);
    }
    if (row.count > 0) row.mean_iters = static_cast<double>(total) / static_cast<double>(row.count);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "f,mean_iters,max_iters,count\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%d,%ld\n", r.f, r.mean_iters, r.max_iters, r.count);
    out << buf;
  }
}

HuntResult hunt(const BenchConfig& cfg) {
  HuntResult res;
  const int f = cfg.f;
  const std::filesystem::path dir = ensure_out_dir(cfg);
  const std::string key = config_key(cfg);
  const std::string ckpt = (dir / "hunt_checkpoint.json").string();

  long next_index = 0;
  bool injected = false;
  if (std::filesystem::exists(ckpt)) {
    try {
      const json j = load_json(ckpt);
      if (j.value("key", "") == key) {
        next_index = j.value("next_index", 0L);
        injected = j.value("injected", false);
        res.completed = j.value("completed", 0L);
        res.generation_failures = j.value("generation_failures", 0L);
        res.barrier_hits = j.value("barrier_hits", 0L);
        res.counterexamples = j.value("counterexamples", 0L);
        if (j.contains("histogram"))
          for (const auto& cell : j.at("histogram"))
            res.histogram[cell.at(0).get<int>()] = cell.at(1).get<long>();
        if (res.counterexamples > 0) res.exit_code = 2;
      }
    } catch (const std::exception&) {
      // unreadable checkpoint: start over rather than guess
    }
  }

  auto archive = [&](const GproInstance& inst, const PriTrace& t, const std::string& tag) {
    // self-contained for replay: the instance, the full trace, and the
    // configuration that drew it
    json j;
    j["config"] = to_json(cfg);
    j["instance"] = to_json(inst);
    j["trace"] = to_json(inst, t);
    const std::string path = (dir / (tag + ".json")).string();
    save_json(path, j);
    res.archived.push_back(path);
  };
  auto failing = [&](const PriTrace& t) {
    return t.termination != Termination::Converged || t.switch_count > f ||
           (cfg.fail_at && t.switch_count >= *cfg.fail_at);
  };
  auto account = [&](const GproInstance& inst, const PriTrace& t, const std::string& label) {
    ++res.completed;
    ++res.histogram[t.switch_count];
    if (failing(t)) {
      ++res.counterexamples;
      res.exit_code = 2;
      archive(inst, t, "counterexample_" + label);
    } else if (t.switch_count == f) {
      ++res.barrier_hits;
      archive(inst, t, "hit_" + label);
    }
  };
  auto save_checkpoint = [&] {
    json j;
    j["key"] = key;
    j["injected"] = true;
    j["next_index"] = next_index;
    j["completed"] = res.completed;
    j["generation_failures"] = res.generation_failures;
    j["barrier_hits"] = res.barrier_hits;
    j["counterexamples"] = res.counterexamples;
    json hist = json::array();
    for (const auto& [iters, runs] : res.histogram) hist.push_back({iters, runs});
    j["histogram"] = std::move(hist);
    save_json(ckpt, j);
  };

  if (!injected) {
    long k = 0;
    for (const std::string& file : cfg.inject) {
      const GproInstance inst = load_instance(file);
      const PriTrace t = solve(inst, all_active_policy(inst), cfg.sense);
      account(inst, t, "inject_" + std::to_string(k));
      ++k;
    }
    save_checkpoint();
  }

  struct Noteworthy {
    GproInstance inst;
    PriTrace trace;
  };
  const long block = std::max<long>(1, cfg.checkpoint_every);
  const int workers = resolve_workers(cfg);
  while (next_index < cfg.count && res.exit_code == 0) {
    const long end = std::min(cfg.count, next_index + block);
    std::vector<int> iters(static_cast<size_t>(end - next_index), -1);
    std::map<long, Noteworthy> notes;
    std::mutex mu;
    const long base = next_index;
    parallel_for(base, end, workers, [&](long i) {
      GproInstance inst;
      try {
        inst = draw_instance(cfg, f, i);
      } catch (const std::runtime_error&) {
        return;
      }
      PriTrace t = solve(inst, all_active_policy(inst), cfg.sense);
      iters[static_cast<size_t>(i - base)] = t.switch_count;
      if (failing(t) || t.switch_count == f) {
        std::lock_guard<std::mutex> lock(mu);
        notes.emplace(i, Noteworthy{std::move(inst), std::move(t)});
      }
    });
    for (long i = base; i < end; ++i) {
      const int v = iters[static_cast<size_t>(i - base)];
      const auto it = notes.find(i);
      if (it != notes.end()) {
        account(it->second.inst, it->second.trace, std::to_string(i));
      } else if (v < 0) {
        ++res.generation_failures;
      } else {
        ++res.completed;
        ++res.histogram[v];
      }
    }
    next_index = end;
    save_checkpoint();
  }
  return res;
}

FamilyReport single_source_checks(const BenchConfig& cfg) {
  FamilyReport rep;
  const int f = cfg.f;
  const int workers = resolve_workers(cfg);
  const bool archiving = !cfg.out_dir.empty();
  const std::filesystem::path dir = archiving ? ensure_out_dir(cfg) : std::filesystem::path();
  std::mutex mu;

  parallel_for(0, cfg.count, workers, [&](long i) {
    GproInstance inst;
    try {
      inst = draw_instance(cfg, f, i);
    } catch (const std::runtime_error&) {
      std::lock_guard<std::mutex> lock(mu);
      ++rep.generation_failures;
      return;
    }

    // the one free-edge source that is not the start node, if any
    int w = -1;
    for (EdgeId e : inst.free_ids()) {
      const int from = inst.edges[e].from;
      if (from == inst.v_s) continue;
      if (w >= 0 && w != from)
        throw std::logic_error("family generator produced free edges at two non-start sources");
      w = from;
    }

    std::vector<Policy> starts{all_active_policy(inst)};
    Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<uint64_t>(i)), 0x57A7));
    for (int r = 0; r < cfg.random_starts; ++r)
      starts.push_back(random_feasible_policy(inst, rng));

    const double dirn = cfg.sense == Sense::MaximizePagerank ? 1.0 : -1.0;
    long iter_viol = 0;
    long dom_viol = 0;
    int max_it = 0;
    PriTrace bad_trace;
    for (const Policy& p : starts) {
      const PriTrace t = solve(inst, p, cfg.sense);
      max_it = std::max(max_it, t.switch_count);
      const bool bad_iters = t.termination != Termination::Converged || t.switch_count > f;
      bool bad_dom = false;
      for (size_t k = 1; k < t.iterates.size() && !bad_dom; ++k) {
        const std::vector<double>& prev = t.iterates[k - 1].phi;
        const std::vector<double>& cur = t.iterates[k].phi;
        const double dw = w >= 0 ? dirn * (prev[w] - cur[w]) : 0.0;
        for (int u = 0; u < inst.num_nodes(); ++u) {
          if (u == inst.v_t || u == inst.v_s || u == w) continue;
          const double du = dirn * (prev[u] - cur[u]);
          const double band = 1e-7 * (1.0 + std::abs(prev[u]) + (w >= 0 ? std::abs(prev[w]) : 0.0));
          // hitting times move one way only, never past the source's move,
          // and not at all when every free edge leaves the start node
          if (du < -band || (w >= 0 && du > dw + band) || (w < 0 && du > band)) {
            bad_dom = true;
            break;
          }
        }
      }
      // exact split on a subsample: the move anywhere equals the chance of
      // passing through the source times the move at the source
      if (!bad_dom && w >= 0 && i < 200) {
        for (size_t k = 1; k < t.iterates.size() && !bad_dom; ++k) {
          const std::vector<double>& prev = t.iterates[k - 1].phi;
          const std::vector<double>& cur = t.iterates[k].phi;
          const double dw = prev[w] - cur[w];
          for (int u = 0; u < inst.num_nodes(); ++u) {
            if (u == inst.v_t || u == inst.v_s || u == w) continue;
            try {
              const Decomposition d = decompose(inst, t.iterates[k - 1].policy, u, w);
              const double predicted = (1.0 - d.p_uv) * dw;
              if (std::abs((prev[u] - cur[u]) - predicted) >
                  1e-6 * (1.0 + std::abs(dw) + std::abs(prev[u]))) {
                bad_dom = true;
                break;
              }
            } catch (const DegenerateDecompositionError&) {
            }
          }
        }
      }
      if (bad_iters) ++iter_viol;
      if (bad_dom) ++dom_viol;
      if ((bad_iters || bad_dom) && bad_trace.iterates.empty()) bad_trace = t;
    }

    std::lock_guard<std::mutex> lock(mu);
    rep.runs += static_cast<long>(starts.size());
    rep.iteration_violations += iter_viol;
    rep.dominance_violations += dom_viol;
    rep.max_iterations = std::max(rep.max_iterations, max_it);
    if ((iter_viol || dom_viol) && archiving && rep.examples.size() < 16) {
      json j;
      j["instance"] = to_json(inst);
      j["trace"] = to_json(inst, bad_trace);
      const std::string path = (dir / ("family_violation_" + std::to_string(i) + ".json")).string();
      save_json(path, j);
      rep.examples.push_back(path);
    }
  });
  return rep;
}

std::vector<ZapRow> zapping_pi_vi_checks(const BenchConfig& cfg, const std::vector<double>& cs) {
  std::vector<ZapRow> rows;
  const int workers = resolve_workers(cfg);
  for (size_t ci = 0; ci < cs.size(); ++ci) {
    ZapRow row;
    row.c = cs[ci];
    BenchConfig sub = cfg;
    sub.zapping = cs[ci];
    std::mutex mu;
    long pi_total = 0;
    long vi_total = 0;
    parallel_for(0, cfg.count, workers, [&](long i) {
      GproInstance inst;
      try {
        inst = draw_instance(sub, sub.f, i + static_cast<long>(ci) * 1000003L);
      } catch (const std::runtime_error&) {
        return;
      }
      const auto [ssp, map] = gpro_to_ssp_direct(inst);
      SspPolicy start;
      start.choice.assign(ssp.num_states(), 0);
      const PiResult pi = policy_iteration(ssp, start);
      const ViResult vi = value_iteration(ssp);
      double gap = 0.0;
      for (int s = 0; s < ssp.num_states(); ++s)
        gap = std::max(gap, std::abs(pi.values[s] - vi.values[s]));
      const SspStats st = ssp_stats(ssp);
      const double n = ssp.num_states();
      const double shape = n * n * std::log(n * std::max(2.0, st.delta_bits)) / cs[ci];

      std::lock_guard<std::mutex> lock(mu);
      ++row.pairs;
      pi_total += pi.iterations;
      vi_total += vi.iterations;
      if (!vi.converged || pi.iterations > vi.iterations) ++row.pi_worse;
      row.max_value_gap = std::max(row.max_value_gap, gap);
      row.eta_min = std::min(row.eta_min, st.eta);
      row.diameter_max = std::max(row.diameter_max, st.diameter);
      row.bound_shape_max = std::max(row.bound_shape_max, shape);
    });
    if (row.pairs > 0) {
      row.mean_pi = static_cast<double>(pi_total) / static_cast<double>(row.pairs);
      row.mean_vi = static_cast<double>(vi_total) / static_cast<double>(row.pairs);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pro
