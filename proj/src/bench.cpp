#include "limo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace limo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

ReportMolecule report_molecule(const MolGraph& g,
                               std::vector<std::pair<std::string, double>>
                                   scores) {
  ReportMolecule m;
  m.key = canonical_key(g);
  m.smiles = to_smiles(g);
  m.scores = std::move(scores);
  return m;
}

// Memoized oracle evaluation over a trace; consecutive steps usually decode
// to the same molecule.
class TraceScorer {
 public:
  explicit TraceScorer(PropertyOracle& oracle) : oracle_(oracle) {}

  double value(const MolGraph& g, const std::string& key) {
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double v = oracle_.score(g);
    memo_[key] = v;
    return v;
  }

 private:
  PropertyOracle& oracle_;
  std::map<std::string, double> memo_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic corpus.
// ---------------------------------------------------------------------------

namespace {

Element weighted_element(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.64) return Element::C;
  if (u < 0.75) return Element::N;
  if (u < 0.86) return Element::O;
  if (u < 0.91) return Element::F;
  if (u < 0.95) return Element::S;
  if (u < 0.97) return Element::Cl;
  if (u < 0.99) return Element::Br;
  return Element::P;
}

bool double_bond_ok(Element e) {
  return e == Element::C || e == Element::N || e == Element::O ||
         e == Element::S;
}

bool triple_bond_ok(Element e) {
  return e == Element::C || e == Element::N;
}

}  // namespace

MolGraph random_molecule(Rng& rng, int min_atoms, int max_atoms) {
  const int target = min_atoms + rng.uniform_int(max_atoms - min_atoms + 1);
  MolGraph g;
  std::vector<int> cap;
  g.add_atom(weighted_element(rng));
  cap.push_back(max_valence(g.atoms[0]));

  while (g.atom_count() < target) {
    std::vector<int> open;
    for (int i = 0; i < g.atom_count(); ++i) {
      if (cap[i] >= 1) open.push_back(i);
    }
    if (open.empty()) break;
    int parent = open[rng.uniform_int(static_cast<int>(open.size()))];
    Element e = weighted_element(rng);
    int order = 1;
    const double u = rng.uniform();
    // Multi-order bonds stay within child-expressible element pairs so the
    // encoder can always carry them on tree edges.
    if (u < 0.02 && cap[parent] >= 3 && triple_bond_ok(g.atoms[parent]) &&
        triple_bond_ok(e)) {
      order = 3;
    } else if (u < 0.15 && cap[parent] >= 2 &&
               double_bond_ok(g.atoms[parent]) && double_bond_ok(e)) {
      order = 2;
    }
    if (order > max_valence(e)) order = 1;
    int atom = g.add_atom(e);
    cap.push_back(max_valence(e) - order);
    g.add_bond(parent, atom, order);
    cap[parent] -= order;
  }

  // A few 5/6-ring closures between open atoms at distance 4 or 5.
  int attempts = rng.uniform_int(3);
  for (int t = 0; t < attempts; ++t) {
    std::vector<int> open;
    for (int i = 0; i < g.atom_count(); ++i) {
      if (cap[i] >= 1) open.push_back(i);
    }
    if (open.size() < 2) break;
    int a = open[rng.uniform_int(static_cast<int>(open.size()))];
    // BFS distances from a.
    std::vector<int> dist(g.atom_count(), -1);
    std::queue<int> q;
    q.push(a);
    dist[a] = 0;
    while (!q.empty()) {
      int u2 = q.front();
      q.pop();
      for (const Bond& b : g.bonds) {
        int v = -1;
        if (b.a == u2) v = b.b;
        if (b.b == u2) v = b.a;
        if (v >= 0 && dist[v] < 0) {
          dist[v] = dist[u2] + 1;
          q.push(v);
        }
      }
    }
    std::vector<int> targets;
    for (int i : open) {
      if (i != a && (dist[i] == 4 || dist[i] == 5)) targets.push_back(i);
    }
    if (targets.empty()) continue;
    int b = targets[rng.uniform_int(static_cast<int>(targets.size()))];
    bool bonded = false;
    for (const Bond& bd : g.bonds) {
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) bonded = true;
    }
    if (bonded) continue;
    g.add_bond(a, b, 1);
    cap[a] -= 1;
    cap[b] -= 1;
  }
  return g;
}

std::vector<selfies::SelfiesString> synthetic_corpus(int count,
                                                     std::uint64_t seed,
                                                     int n) {
  std::vector<selfies::SelfiesString> corpus;
  corpus.reserve(count);
  Rng rng(seed);
  while (static_cast<int>(corpus.size()) < count) {
    MolGraph g = random_molecule(rng);
    try {
      corpus.push_back(selfies::encode(g, n));
    } catch (const selfies::EncodeError&) {
      // oversized derivation; draw again
    }
  }
  return corpus;
}

std::vector<selfies::SelfiesString> load_corpus(const std::string& path,
                                                int n) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open corpus: " + path);
  std::vector<selfies::SelfiesString> corpus;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    corpus.push_back(selfies::from_text(line, n));
  }
  return corpus;
}

void save_corpus(const std::vector<selfies::SelfiesString>& corpus,
                 const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write corpus: " + path);
  for (const auto& s : corpus) os << selfies::to_text(s) << "\n";
}

// ---------------------------------------------------------------------------
// Random generation task.
// ---------------------------------------------------------------------------

TaskReport task_random_generation(const VaeModel& model, int k,
                                  std::uint64_t seed,
                                  const std::set<std::string>& training_keys) {
  auto start = Clock::now();
  TaskReport report;
  report.task = "random-generation";
  report.config = {{"k", std::to_string(k)},
                   {"seed", std::to_string(seed)},
                   {"diversity_sample", "1000"}};

  auto mols = sample_random(model, k, seed);
  int valid = 0;
  std::vector<std::string> keys;
  keys.reserve(mols.size());
  for (const auto& g : mols) {
    valid += validate(g);
    keys.push_back(canonical_key(g));
  }
  report.metrics.push_back(
      {"valid_pct", 100.0 * valid / static_cast<double>(k)});

  auto unique_at = [&](int cut) {
    std::set<std::string> s(keys.begin(), keys.begin() + cut);
    return 100.0 * static_cast<double>(s.size()) / cut;
  };
  if (k >= 1000) {
    report.metrics.push_back({"unique_at_1k_pct", unique_at(1000)});
  } else {
    report.warnings.push_back("k < 1000: unique@1k omitted");
  }
  if (k >= 10000) {
    report.metrics.push_back({"unique_at_10k_pct", unique_at(10000)});
  } else {
    report.warnings.push_back("k < 10000: unique@10k omitted");
  }

  const int dsample = std::min(k, 1000);
  if (dsample >= 2) {
    std::vector<MolGraph> head(mols.begin(), mols.begin() + dsample);
    report.metrics.push_back({"diversity", diversity(head)});
  }
  if (!training_keys.empty()) {
    int novel = 0;
    for (const auto& key : keys) novel += !training_keys.count(key);
    report.metrics.push_back(
        {"novel_pct", 100.0 * novel / static_cast<double>(k)});
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Property maximization task.
// ---------------------------------------------------------------------------

TaskReport task_maximize(const VaeModel& model, const PropertyPredictor& pred,
                         PropertyOracle& oracle,
                         const MaximizeTaskConfig& config) {
  auto start = Clock::now();
  TaskReport report;
  report.task = "maximize-" + oracle.name();
  report.config = {{"restarts", std::to_string(config.restarts)},
                   {"top_k", std::to_string(config.top_k)},
                   {"steps", std::to_string(config.steps)},
                   {"lr", fmt(config.lr)},
                   {"seed", std::to_string(config.seed)},
                   {"oracle", oracle.name()}};

  Objective obj;
  obj.terms = {{&pred, 1.0, oracle.direction(), std::nullopt}};
  obj.steps = config.steps;
  obj.step_size = config.lr;
  auto candidates =
      multi_start(obj, config.restarts, config.seed, model, config.threads);

  std::vector<MolGraph> mols;
  for (const auto& c : candidates) mols.push_back(c.molecule);
  auto scores = oracle.score_batch(mols);

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scores[i].ok()) ranked.push_back({*scores[i].value, i});
  }
  const bool maximize = oracle.direction() == Direction::Maximize;
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return maximize ? a.first > b.first : a.first < b.first;
  });

  for (int rank = 0;
       rank < std::min<int>(config.top_k, static_cast<int>(ranked.size()));
       ++rank) {
    auto [value, idx] = ranked[rank];
    report.metrics.push_back({"top" + std::to_string(rank + 1), value});
    report.top.push_back(report_molecule(
        candidates[idx].molecule,
        {{oracle.name(), value}, {"predicted", candidates[idx].predicted[0]}}));
  }
  report.metrics.push_back(
      {"unique_candidates", static_cast<double>(candidates.size())});
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Property targeting task.
// ---------------------------------------------------------------------------

TaskReport task_target_range(const VaeModel& model,
                             const PropertyPredictor& pred,
                             PropertyOracle& oracle,
                             const TargetRangeTaskConfig& config) {
  auto start = Clock::now();
  const double mid = 0.5 * (config.lo + config.hi);
  TaskReport report;
  report.task = "target-range-" + oracle.name();
  report.config = {{"lo", fmt(config.lo)},       {"hi", fmt(config.hi)},
                   {"count", std::to_string(config.count)},
                   {"steps", std::to_string(config.steps)},
                   {"lr", fmt(config.lr)},
                   {"seed", std::to_string(config.seed)},
                   {"oracle", oracle.name()}};

  Objective obj;
  obj.terms = {{&pred, 1.0, oracle.direction(), mid}};
  obj.steps = config.steps;
  obj.step_size = config.lr;
  auto runs =
      run_restarts(obj, config.count, config.seed, model, config.threads);

  std::vector<MolGraph> mols;
  for (const auto& c : runs) mols.push_back(c.molecule);
  auto scores = oracle.score_batch(mols);

  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!scores[i].ok()) continue;
    double v = *scores[i].value;
    if (v > config.lo && v < config.hi) hits.push_back(i);
  }
  report.metrics.push_back(
      {"success_pct",
       100.0 * static_cast<double>(hits.size()) / config.count});

  // Diversity over unique successes.
  std::set<std::string> seen;
  std::vector<MolGraph> uniq;
  for (std::size_t i : hits) {
    if (seen.insert(runs[i].key).second) uniq.push_back(runs[i].molecule);
  }
  if (uniq.size() >= 2) {
    report.metrics.push_back({"diversity", diversity(uniq)});
  } else {
    report.warnings.push_back("fewer than 2 unique successes: diversity absent");
  }

  std::vector<std::pair<double, std::size_t>> closest;
  for (std::size_t i : hits)
    closest.push_back({std::abs(*scores[i].value - mid), i});
  std::sort(closest.begin(), closest.end());
  for (std::size_t r = 0; r < std::min<std::size_t>(closest.size(), 10); ++r) {
    std::size_t i = closest[r].second;
    report.top.push_back(report_molecule(
        runs[i].molecule, {{oracle.name(), *scores[i].value}}));
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Similarity-constrained maximization task.
// ---------------------------------------------------------------------------

TaskReport task_similarity_constrained(
    const VaeModel& model, const PropertyPredictor& pred,
    PropertyOracle& oracle,
    const std::vector<selfies::SelfiesString>& starts,
    const SimilarityTaskConfig& config) {
  auto t0 = Clock::now();
  TaskReport report;
  report.task = "similarity-constrained-" + oracle.name();
  std::string deltas_txt;
  for (double d : config.deltas)
    deltas_txt += (deltas_txt.empty() ? "" : ",") + fmt(d);
  report.config = {{"starts", std::to_string(starts.size())},
                   {"deltas", deltas_txt},
                   {"steps", std::to_string(config.steps)},
                   {"lr", fmt(config.lr)},
                   {"oracle", oracle.name()}};

  struct PerStart {
    double base = 0.0;
    // best satisfying oracle value per delta, NaN when none
    std::vector<double> best;
  };
  std::vector<PerStart> results(starts.size());

  std::atomic<std::size_t> next{0};
  std::mutex oracle_mutex;
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= starts.size()) break;

      MolGraph start_mol = selfies::decode(starts[i]);
      Fingerprint start_fp = fingerprint(start_mol);
      auto [mu, logvar] = encode(model, starts[i]);

      Objective obj;
      obj.terms = {{&pred, 1.0, oracle.direction(), std::nullopt}};
      obj.steps = config.steps;
      obj.step_size = config.lr;
      OptimizationTrace trace = reverse_optimize(mu, obj, model);

      PerStart ps;
      {
        std::lock_guard<std::mutex> lock(oracle_mutex);
        ps.base = oracle.score(start_mol);
      }
      ps.best.assign(config.deltas.size(),
                     std::numeric_limits<double>::quiet_NaN());

      std::map<std::string, std::pair<double, double>> memo;  // key->(sim,val)
      for (const TraceStep& step : trace.steps) {
        std::string key = canonical_key(step.molecule);
        auto it = memo.find(key);
        if (it == memo.end()) {
          double sim = tanimoto(fingerprint(step.molecule), start_fp);
          double val;
          {
            std::lock_guard<std::mutex> lock(oracle_mutex);
            val = oracle.score(step.molecule);
          }
          it = memo.emplace(key, std::make_pair(sim, val)).first;
        }
        auto [sim, val] = it->second;
        for (std::size_t d = 0; d < config.deltas.size(); ++d) {
          if (sim >= config.deltas[d] &&
              (std::isnan(ps.best[d]) || oracle.better(val, ps.best[d]))) {
            ps.best[d] = val;
          }
        }
      }
      results[i] = std::move(ps);
    }
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t d = 0; d < config.deltas.size(); ++d) {
    std::vector<double> improvements;
    for (const auto& ps : results) {
      if (!std::isnan(ps.best[d]))
        improvements.push_back(ps.best[d] - ps.base);
    }
    const std::string suffix = fmt(config.deltas[d]);
    report.metrics.push_back(
        {"success_pct_delta_" + suffix,
         100.0 * static_cast<double>(improvements.size()) / starts.size()});
    if (!improvements.empty()) {
      double mean = 0.0;
      for (double v : improvements) mean += v;
      mean /= static_cast<double>(improvements.size());
      double var = 0.0;
      for (double v : improvements) var += (v - mean) * (v - mean);
      var /= static_cast<double>(improvements.size());
      report.metrics.push_back({"improvement_mean_delta_" + suffix, mean});
      report.metrics.push_back(
          {"improvement_std_delta_" + suffix, std::sqrt(var)});
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// Substructure-constrained task.
// ---------------------------------------------------------------------------

TaskReport task_substructure(const VaeModel& model,
                             const PropertyPredictor& pred,
                             PropertyOracle& oracle,
                             const selfies::SelfiesString& start,
                             const std::set<int>& fixed_positions,
                             const SubstructureTaskConfig& config) {
  auto t0 = Clock::now();
  TaskReport report;
  report.task = "substructure-" + oracle.name();
  std::string fixed_txt;
  for (int p : fixed_positions)
    fixed_txt += (fixed_txt.empty() ? "" : ",") + std::to_string(p);
  report.config = {
      {"direction",
       config.direction == Direction::Maximize ? "maximize" : "minimize"},
      {"fixed_positions", fixed_txt},
      {"steps", std::to_string(config.steps)},
      {"lr", fmt(config.lr)},
      {"lambda", fmt(config.lambda)},
      {"runs", std::to_string(config.runs)},
      {"seed", std::to_string(config.seed)},
      {"oracle", oracle.name()}};

  SubstructureMask mask =
      build_mask(start, fixed_positions, model, config.lambda);
  auto [mu, logvar] = encode(model, start);
  SymbolDistribution anchor_dist = decode(model, mu);
  selfies::SelfiesString anchor_syms = argmax_symbols(anchor_dist);
  MolGraph anchor_mol = selfies::decode(anchor_syms);
  const double anchor_val = oracle.score(anchor_mol);

  auto retains = [&](const selfies::SelfiesString& syms) {
    for (int p : fixed_positions) {
      if (syms[p] != anchor_syms[p]) return false;
    }
    return true;
  };

  Objective obj;
  obj.terms = {{&pred, 1.0, config.direction, std::nullopt}};
  obj.steps = config.steps;
  obj.step_size = config.lr;
  obj.mask = mask;

  TraceScorer scorer(oracle);
  int retained_runs = 0;
  double best_delta = 0.0;
  bool first_run_retained = false;
  const MolGraph* best_mol = &anchor_mol;

  std::vector<OptimizationTrace> traces(config.runs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int run = next.fetch_add(1);
      if (run >= config.runs) break;
      LatentVector z0;
      if (run == 0) {
        z0 = mu;
      } else {
        Rng rng(config.seed + 7ull * static_cast<std::uint64_t>(run));
        z0.resize(model.dims.m);
        for (auto& v : z0) v = static_cast<float>(rng.normal());
      }
      traces[run] = reverse_optimize(z0, obj, model);
    }
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (int run = 0; run < config.runs; ++run) {
    const OptimizationTrace& trace = traces[run];
    const TraceStep& last = trace.steps.back();
    bool end_retained = retains(last.symbols);
    retained_runs += end_retained;
    if (run == 0) {
      first_run_retained = end_retained;
      // Best oracle value among retaining steps (the reconstruction start
      // guarantees at least the initial step retains).
      double best = anchor_val;
      for (const TraceStep& step : trace.steps) {
        if (!retains(step.symbols)) continue;
        double v = scorer.value(step.molecule, canonical_key(step.molecule));
        if ((config.direction == Direction::Maximize && v > best) ||
            (config.direction == Direction::Minimize && v < best)) {
          best = v;
          best_mol = &step.molecule;
        }
      }
      best_delta = best - anchor_val;
    }
  }

  report.metrics.push_back({"delta_" + oracle.name(), best_delta});
  report.metrics.push_back({"retention_flag", first_run_retained ? 1.0 : 0.0});
  report.metrics.push_back(
      {"retention_rate",
       static_cast<double>(retained_runs) / std::max(1, config.runs)});
  report.top.push_back(report_molecule(
      *best_mol, {{oracle.name(), anchor_val + best_delta}}));
  report.wall_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// Binding-affinity task.
// ---------------------------------------------------------------------------

TaskReport task_affinity(const VaeModel& model, PropertyOracle& affinity,
                         const AffinityTaskConfig& config) {
  auto t0 = Clock::now();
  TaskReport report;
  report.task = "affinity-" + config.mode;
  report.config = {{"mode", config.mode},
                   {"w_affinity", fmt(config.w_affinity)},
                   {"w_qed", fmt(config.w_qed)},
                   {"w_sa", fmt(config.w_sa)},
                   {"predictor_dataset", std::to_string(config.predictor_dataset)},
                   {"restarts", std::to_string(config.restarts)},
                   {"steps", std::to_string(config.steps)},
                   {"lr", fmt(config.lr)},
                   {"seed", std::to_string(config.seed)},
                   {"oracle", affinity.name()}};

  PredictorTrainConfig ptc;
  ptc.epochs = config.predictor_epochs;
  ptc.seed = config.seed;

  auto affinity_data = gen_training_set(model, affinity,
                                        config.predictor_dataset, config.seed);
  if (affinity_data.size() < 2)
    throw std::runtime_error("affinity oracle produced no usable labels");
  PropertyPredictor aff_pred =
      train_predictor(affinity_data, PredictorMode::Decoded, ptc, model);
  aff_pred.target_oracle = affinity.name();

  Objective obj;
  obj.terms = {{&aff_pred, config.w_affinity, affinity.direction(),
                std::nullopt}};
  obj.steps = config.steps;
  obj.step_size = config.lr;

  PropertyPredictor qed_pred, sa_pred;
  if (config.mode == "multi") {
    auto qed_oracle = make_surrogate_oracle("qed");
    auto sa_oracle = make_surrogate_oracle("sa");
    auto qed_data = gen_training_set(model, *qed_oracle,
                                     config.predictor_dataset, config.seed + 1);
    auto sa_data = gen_training_set(model, *sa_oracle,
                                    config.predictor_dataset, config.seed + 2);
    PredictorTrainConfig qtc = ptc;
    qtc.seed = config.seed + 11;
    PredictorTrainConfig stc = ptc;
    stc.seed = config.seed + 12;
    qed_pred = train_predictor(qed_data, PredictorMode::Decoded, qtc, model);
    qed_pred.target_oracle = "qed";
    sa_pred = train_predictor(sa_data, PredictorMode::Decoded, stc, model);
    sa_pred.target_oracle = "sa";
    obj.terms.push_back({&qed_pred, config.w_qed, Direction::Maximize,
                         std::nullopt});
    obj.terms.push_back({&sa_pred, config.w_sa, Direction::Minimize,
                         std::nullopt});
  } else if (config.mode != "single") {
    throw std::invalid_argument("affinity task mode must be single or multi");
  }

  auto candidates =
      multi_start(obj, config.restarts, config.seed + 101, model,
                  config.threads);
  std::vector<MolGraph> optimized;
  for (const auto& c : candidates) optimized.push_back(c.molecule);

  // Before/after property distributions (affinity scored by the oracle).
  auto random_mols = sample_random(model, config.restarts, config.seed + 555);
  auto dist_for = [&](const std::vector<MolGraph>& mols, const std::string& tag,
                      TaskReport& rep) {
    std::vector<double> qed_vals, sa_vals, aff_vals;
    auto scores = affinity.score_batch(mols);
    for (std::size_t i = 0; i < mols.size(); ++i) {
      qed_vals.push_back(qed_surrogate(mols[i]));
      sa_vals.push_back(sa_surrogate(mols[i]));
      if (scores[i].ok()) aff_vals.push_back(*scores[i].value);
    }
    rep.distributions.push_back({"qed_" + tag, qed_vals});
    rep.distributions.push_back({"sa_" + tag, sa_vals});
    rep.distributions.push_back({"affinity_" + tag, aff_vals});
  };
  dist_for(random_mols, "random", report);
  dist_for(optimized, "optimized", report);

  auto dist_mean = [&](const std::string& name) {
    for (const auto& [k, v] : report.distributions) {
      if (k == name && !v.empty()) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
      }
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  report.metrics.push_back({"qed_mean_random", dist_mean("qed_random")});
  report.metrics.push_back({"qed_mean_optimized", dist_mean("qed_optimized")});
  report.metrics.push_back({"sa_mean_random", dist_mean("sa_random")});
  report.metrics.push_back({"sa_mean_optimized", dist_mean("sa_optimized")});
  report.metrics.push_back(
      {"affinity_mean_random", dist_mean("affinity_random")});
  report.metrics.push_back(
      {"affinity_mean_optimized", dist_mean("affinity_optimized")});

  std::vector<MolGraph> finalists = optimized;
  if (config.mode == "multi") {
    finalists = filter(finalists, config.filter);
    report.metrics.push_back(
        {"filter_survivors", static_cast<double>(finalists.size())});
    if (config.finetune_survivors) {
      for (auto& g : finalists) g = finetune(g, affinity);
    }
  }

  auto final_scores = affinity.score_batch(finalists);
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < finalists.size(); ++i) {
    if (final_scores[i].ok()) ranked.push_back({*final_scores[i].value, i});
  }
  const bool maximize = affinity.direction() == Direction::Maximize;
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return maximize ? a.first > b.first : a.first < b.first;
  });
  for (int rank = 0;
       rank < std::min<int>(config.top_k, static_cast<int>(ranked.size()));
       ++rank) {
    auto [dg, idx] = ranked[rank];
    double kd = kd_from_dg(dg, config.temperature_k);
    report.metrics.push_back({"top" + std::to_string(rank + 1) + "_kd_nm", kd});
    report.top.push_back(report_molecule(
        finalists[idx], {{"dg", dg},
                         {"kd_nm", kd},
                         {"qed", qed_surrogate(finalists[idx])},
                         {"sa", sa_surrogate(finalists[idx])}}));
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

}  // namespace limo
