#include "mortgp/ga.hpp"

#include <algorithm>
#include <cmath>

#include "mortgp/errors.hpp"

namespace mortgp {

void SearchSet::finalize() {
  if (leaves.empty()) throw UsageError("search set must be nonempty");
  for (auto& v : by_coordinate) v.clear();
  for (const LeafType& lt : leaves) {
    if (lt.family == Family::Lin && lt.coord != Coordinate::Year) {
      throw UsageError("search set: Lin is only legal on the year coordinate");
    }
    by_coordinate[static_cast<int>(lt.coord)].push_back(lt);
  }
}

SearchSet SearchSet::restricted() {
  SearchSet set;
  set.name = "r";
  for (Family f : {Family::M12, Family::M52, Family::RBF, Family::Min}) {
    for (Coordinate c : {Coordinate::Age, Coordinate::Year, Coordinate::Cohort}) {
      set.leaves.push_back({f, c});
    }
  }
  set.leaves.push_back({Family::Lin, Coordinate::Year});
  set.finalize();
  return set;
}

SearchSet SearchSet::full() {
  SearchSet set;
  set.name = "f";
  for (int fi = 0; fi < kNumFamilies; ++fi) {
    const Family f = static_cast<Family>(fi);
    if (f == Family::Lin) continue;
    for (Coordinate c : {Coordinate::Age, Coordinate::Year, Coordinate::Cohort}) {
      set.leaves.push_back({f, c});
    }
  }
  set.leaves.push_back({Family::Lin, Coordinate::Year});
  set.finalize();
  return set;
}

SearchSet SearchSet::from_code(const std::string& code) {
  if (code == "r") return restricted();
  if (code == "f") return full();
  throw UsageError("unknown search set '" + code + "' (expected r or f)");
}

void GAConfig::validate() const {
  const double sum = p_crossover + p_subtree + p_hoist + p_point + p_respectful + p_copy;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("GA operation probabilities must sum to 1");
  }
  for (double p : {p_crossover, p_subtree, p_hoist, p_point, p_respectful, p_copy, q_point,
                   q_respectful, q_add}) {
    if (p < 0.0 || p > 1.0) throw UsageError("GA probabilities must lie in [0, 1]");
  }
  if (population < 1 || generations < 1) throw UsageError("population and generations must be >= 1");
  if (tournament_size < 1) throw UsageError("tournament size must be >= 1");
  if (parsimony_d < 1.0 || parsimony_d > 2.0) throw UsageError("double-tournament D must lie in [1, 2]");
  if (init_lengths.empty()) throw UsageError("init length options must be nonempty");
  for (int len : init_lengths) {
    if (len < 1 || len % 2 == 0) throw UsageError("tree lengths must be odd and positive");
  }
}

const char* ga_op_name(GAOp op) {
  switch (op) {
    case GAOp::Init: return "init";
    case GAOp::Crossover: return "crossover";
    case GAOp::Subtree: return "subtree";
    case GAOp::Hoist: return "hoist";
    case GAOp::Point: return "point";
    case GAOp::Respectful: return "respectful_point";
    case GAOp::Copy: return "copy";
  }
  return "?";
}

namespace {

BaseKernel draw_leaf(std::mt19937_64& rng, const std::vector<LeafType>& pool) {
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  const LeafType lt = pool[pick(rng)];
  BaseKernel k;
  k.family = lt.family;
  k.coord = lt.coord;
  return k;
}

KernelExpr build_random_tree(std::mt19937_64& rng, const SearchSet& set, int n_leaves,
                             double q_add) {
  if (n_leaves == 1) return KernelExpr(draw_leaf(rng, set.leaves));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const KernelExpr::Kind op =
      coin(rng) < q_add ? KernelExpr::Kind::Add : KernelExpr::Kind::Mul;
  std::uniform_int_distribution<int> split(1, n_leaves - 1);
  const int left = split(rng);
  KernelExpr lhs = build_random_tree(rng, set, left, q_add);
  KernelExpr rhs = build_random_tree(rng, set, n_leaves - left, q_add);
  return KernelExpr(op, std::move(lhs), std::move(rhs));
}

}  // namespace

KernelExpr initialize_kernel(std::mt19937_64& rng, const SearchSet& set,
                             const std::vector<int>& length_options, double q_add) {
  std::uniform_int_distribution<size_t> pick(0, length_options.size() - 1);
  const int length = length_options[pick(rng)];
  return build_random_tree(rng, set, (length + 1) / 2, q_add);
}

int double_tournament(const std::vector<Individual>& population, std::mt19937_64& rng, int T,
                      double D) {
  if (population.empty()) throw UsageError("tournament requires a nonempty population");
  std::uniform_int_distribution<size_t> pick(0, population.size() - 1);
  auto tournament = [&]() {
    int winner = static_cast<int>(pick(rng));
    for (int i = 1; i < T; ++i) {
      const int cand = static_cast<int>(pick(rng));
      if (population[cand].bic < population[winner].bic) winner = cand;
    }
    return winner;
  };
  const int w1 = tournament();
  const int w2 = tournament();
  const int l1 = population[w1].length, l2 = population[w2].length;
  if (l1 == l2) {
    return population[w1].bic <= population[w2].bic ? w1 : w2;
  }
  const int shorter = l1 < l2 ? w1 : w2;
  const int longer = l1 < l2 ? w2 : w1;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  return coin(rng) < D / 2.0 ? shorter : longer;
}

KernelExpr crossover(const KernelExpr& kappa, const KernelExpr& xi, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_k(0, kappa.length() - 1);
  std::uniform_int_distribution<int> pick_x(0, xi.length() - 1);
  const int at = pick_k(rng);
  const int from = pick_x(rng);
  KernelExpr result = kappa;
  *result.node_at(at) = *xi.node_at(from);
  return result;
}

namespace {

KernelExpr point_mutation(const KernelExpr& expr, std::mt19937_64& rng, const SearchSet& set,
                          double q, bool respectful) {
  KernelExpr result = expr;
  const int len = result.length();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < len; ++i) {
    if (coin(rng) >= q) continue;
    KernelExpr* node = result.node_at(i);
    if (node->is_leaf()) {
      const auto& pool =
          respectful ? set.by_coordinate[static_cast<int>(node->leaf().coord)] : set.leaves;
      node->leaf() = draw_leaf(rng, pool);
    } else {
      // arity-preserving operator flip
      KernelExpr flipped(node->kind() == KernelExpr::Kind::Add ? KernelExpr::Kind::Mul
                                                               : KernelExpr::Kind::Add,
                         node->left(), node->right());
      *node = std::move(flipped);
    }
  }
  return result;
}

}  // namespace

KernelExpr mutate(const KernelExpr& expr, MutationKind kind, std::mt19937_64& rng,
                  const SearchSet& set, const GAConfig& config) {
  switch (kind) {
    case MutationKind::Subtree: {
      std::uniform_int_distribution<int> pick(0, expr.length() - 1);
      const int at = pick(rng);
      KernelExpr fresh = initialize_kernel(rng, set, config.subtree_lengths, config.q_add);
      KernelExpr result = expr;
      *result.node_at(at) = std::move(fresh);
      return result;
    }
    case MutationKind::Hoist: {
      std::uniform_int_distribution<int> pick(0, expr.length() - 1);
      const int u = pick(rng);
      KernelExpr result = expr;
      KernelExpr* at = result.node_at(u);
      std::uniform_int_distribution<int> pick_inner(0, at->length() - 1);
      const int v = pick_inner(rng);
      KernelExpr hoisted = *at->node_at(v);
      *at = std::move(hoisted);
      return result;
    }
    case MutationKind::Point:
      return point_mutation(expr, rng, set, config.q_point, /*respectful=*/false);
    case MutationKind::Respectful:
      return point_mutation(expr, rng, set, config.q_respectful, /*respectful=*/true);
    case MutationKind::Copy:
      return expr;
  }
  throw UsageError("unknown mutation kind");
}

int GARecord::total_slots() const {
  int n = 0;
  for (const auto& gen : generations) n += static_cast<int>(gen.size());
  return n;
}

std::vector<std::shared_ptr<const FitResult>> GARecord::slot_results() const {
  std::vector<std::shared_ptr<const FitResult>> out;
  out.reserve(total_slots());
  for (const auto& gen : generations) {
    for (const auto& slot : gen) {
      auto it = fits.find(slot.canonical);
      if (it != fits.end()) out.push_back(it->second);
    }
  }
  return out;
}

FitnessFn gp_fitness(const MortalityDataset& data, const FitOptions& base_options) {
  return [&data, base_options](const KernelExpr& expr, uint64_t seed) {
    FitOptions opts = base_options;
    opts.rng_seed = seed;
    opts.record_trace = false;
    Fitness out;
    auto fr = std::make_shared<FitResult>(fit(expr, data, opts));
    out.failed = fr->failed;
    out.bic = fr->failed ? std::numeric_limits<double>::infinity() : fr->bic;
    out.fit = std::move(fr);
    return out;
  };
}

namespace {

struct OpDraw {
  GAOp op;
  MutationKind kind;  // valid when op != Crossover
};

OpDraw draw_operation(std::mt19937_64& rng, const GAConfig& cfg) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double x = coin(rng);
  double acc = cfg.p_crossover;
  if (x < acc) return {GAOp::Crossover, MutationKind::Copy};
  acc += cfg.p_subtree;
  if (x < acc) return {GAOp::Subtree, MutationKind::Subtree};
  acc += cfg.p_hoist;
  if (x < acc) return {GAOp::Hoist, MutationKind::Hoist};
  acc += cfg.p_point;
  if (x < acc) return {GAOp::Point, MutationKind::Point};
  acc += cfg.p_respectful;
  if (x < acc) return {GAOp::Respectful, MutationKind::Respectful};
  return {GAOp::Copy, MutationKind::Copy};
}

// Fit every canonical key not yet in the cache, in parallel; per-key RNG
// streams are derived from the master seed so scheduling cannot matter.
void score_generation(std::vector<GASlot>& gen, GARecord& record, const GAConfig& cfg,
                      const FitnessFn& fitness) {
  std::vector<std::string> todo;
  for (const auto& slot : gen) {
    if (!record.fits.count(slot.canonical)) {
      record.fits.emplace(slot.canonical, nullptr);
      todo.push_back(slot.canonical);
    }
  }
  std::map<std::string, const KernelExpr*> expr_of;
  for (const auto& slot : gen) {
    if (!expr_of.count(slot.canonical)) expr_of[slot.canonical] = &slot.expr;
  }
  std::vector<Fitness> results(todo.size());
  parallel_for(static_cast<int>(todo.size()), cfg.workers, [&](int i) {
    const uint64_t seed = derive_seed(cfg.master_seed, todo[i], /*attempt=*/0);
    results[i] = fitness(*expr_of[todo[i]], seed);
  });
  for (size_t i = 0; i < todo.size(); ++i) {
    record.fits[todo[i]] = results[i].fit;
  }
  for (auto& slot : gen) {
    const auto& fr = record.fits.at(slot.canonical);
    if (fr && !fr->failed) {
      slot.bic = fr->bic;
      slot.fit_failed = false;
    } else {
      slot.bic = std::numeric_limits<double>::infinity();
      slot.fit_failed = true;
    }
  }
}

}  // namespace

GARecord run_ga(const GAConfig& config, const FitnessFn& fitness) {
  config.validate();
  GARecord record;
  std::mt19937_64 master = make_rng(config.master_seed);

  std::vector<GASlot> gen0(config.population);
  for (int i = 0; i < config.population; ++i) {
    gen0[i].expr = initialize_kernel(master, config.search_set, config.init_lengths, config.q_add);
    gen0[i].canonical = canonical_form(gen0[i].expr);
    gen0[i].op = GAOp::Init;
  }
  score_generation(gen0, record, config, fitness);
  record.generations.push_back(std::move(gen0));

  for (int g = 1; g < config.generations; ++g) {
    const auto& prev = record.generations[g - 1];
    std::vector<Individual> pop(prev.size());
    for (size_t i = 0; i < prev.size(); ++i) {
      pop[i] = {prev[i].expr.length(), prev[i].bic};
    }

    std::vector<GASlot> gen(config.population);
    for (int i = 0; i < config.population; ++i) {
      GASlot& slot = gen[i];
      slot.op_seed = master();
      std::mt19937_64 rng = make_rng(slot.op_seed);
      slot.ancestor1 =
          double_tournament(pop, rng, config.tournament_size, config.parsimony_d);
      const OpDraw draw = draw_operation(rng, config);
      slot.op = draw.op;
      if (draw.op == GAOp::Crossover) {
        slot.ancestor2 =
            double_tournament(pop, rng, config.tournament_size, config.parsimony_d);
        slot.expr = crossover(prev[slot.ancestor1].expr, prev[slot.ancestor2].expr, rng);
      } else {
        slot.expr = mutate(prev[slot.ancestor1].expr, draw.kind, rng, config.search_set, config);
      }
      slot.canonical = canonical_form(slot.expr);
    }
    score_generation(gen, record, config, fitness);
    record.generations.push_back(std::move(gen));
  }
  return record;
}

std::vector<GenerationQuantiles> generation_quantiles(const GARecord& record) {
  if (record.generations.empty()) throw UsageError("empty GA record");
  std::vector<GenerationQuantiles> rows;
  for (size_t g = 0; g < record.generations.size(); ++g) {
    const auto& gen = record.generations[g];
    std::vector<double> bics;
    bics.reserve(gen.size());
    for (const auto& slot : gen) bics.push_back(slot.bic);
    std::sort(bics.begin(), bics.end());
    const int n = static_cast<int>(bics.size());
    auto kth_best = [&](double q) {
      int k = std::max(1, static_cast<int>(std::lround((1.0 - q) * n)));
      k = std::min(k, n);
      return bics[k - 1];
    };
    GenerationQuantiles row;
    row.generation = static_cast<int>(g);
    row.min = bics.front();
    row.q99 = kth_best(0.99);
    row.q975 = kth_best(0.975);
    row.q95 = kth_best(0.95);
    row.q90 = kth_best(0.90);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mortgp
