#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mortgp/fit.hpp"
#include "mortgp/scoring.hpp"

namespace mortgp {

struct LeafType {
  Family family;
  Coordinate coord;
};

// Allowed (family, coordinate) leaf pairs. Lin appears on the year axis only.
struct SearchSet {
  std::string name;
  std::vector<LeafType> leaves;
  std::array<std::vector<LeafType>, 3> by_coordinate;

  static SearchSet restricted();  // {M12, M52, RBF, Min} x {a,y,c} + Lin_y
  static SearchSet full();        // all nine families, Lin restricted to year
  static SearchSet from_code(const std::string& code);  // "r" or "f"

  void finalize();  // fills by_coordinate; validates
};

struct GAConfig {
  int population = 200;
  int generations = 20;
  int tournament_size = 7;
  double parsimony_d = 1.2;  // shorter double-tournament winner chosen w.p. D/2

  double p_crossover = 0.45;
  double p_subtree = 0.2;
  double p_hoist = 0.1;
  double p_point = 0.05;
  double p_respectful = 0.15;
  double p_copy = 0.05;

  double q_point = 0.25;       // per-node point mutation rate
  double q_respectful = 0.35;  // per-node respectful mutation rate
  double q_add = 0.5;          // P(add) for operators when initializing trees
  std::vector<int> init_lengths{3, 5, 7, 9};
  std::vector<int> subtree_lengths{1, 3, 5};

  SearchSet search_set = SearchSet::restricted();
  uint64_t master_seed = 1;
  FitOptions fit_options;
  int workers = 4;

  void validate() const;  // operation probabilities must sum to 1
};

enum class GAOp : uint8_t { Init, Crossover, Subtree, Hoist, Point, Respectful, Copy };
const char* ga_op_name(GAOp op);

enum class MutationKind : uint8_t { Subtree, Hoist, Point, Respectful, Copy };

KernelExpr initialize_kernel(std::mt19937_64& rng, const SearchSet& set,
                             const std::vector<int>& length_options, double q_add);

struct Individual {
  int length = 0;
  double bic = 0.0;
};

// Two independent size-T min-BIC tournaments (sampling with replacement);
// between the two winners the shorter one is chosen with probability D/2,
// with equal lengths resolved by lower BIC. Returns a population index.
int double_tournament(const std::vector<Individual>& population, std::mt19937_64& rng, int T,
                      double D);

// Uniform node in kappa replaced by a copy of a uniform node of xi.
KernelExpr crossover(const KernelExpr& kappa, const KernelExpr& xi, std::mt19937_64& rng);

KernelExpr mutate(const KernelExpr& expr, MutationKind kind, std::mt19937_64& rng,
                  const SearchSet& set, const GAConfig& config);

struct GASlot {
  KernelExpr expr;
  std::string canonical;
  double bic = 0.0;
  GAOp op = GAOp::Init;
  int ancestor1 = -1, ancestor2 = -1;  // previous-generation slots
  uint64_t op_seed = 0;
  bool fit_failed = false;
};

struct GARecord {
  std::vector<std::vector<GASlot>> generations;
  // best fit per canonical key (first fit wins; duplicates reuse it)
  std::map<std::string, std::shared_ptr<const FitResult>> fits;

  int total_slots() const;
  std::vector<std::shared_ptr<const FitResult>> slot_results() const;  // one per slot
};

struct Fitness {
  double bic = std::numeric_limits<double>::infinity();
  bool failed = true;
  std::shared_ptr<const FitResult> fit;
};

// Fitness evaluation hook; production code fits a GP, tests may mock it.
using FitnessFn = std::function<Fitness(const KernelExpr&, uint64_t seed)>;

FitnessFn gp_fitness(const MortalityDataset& data, const FitOptions& base_options);

// Algorithm: generation 0 from initialize_kernel; afterwards each slot picks
// an ancestor by double tournament, applies one operation drawn from the
// config probabilities (crossover draws a second ancestor), and is scored.
// Canonical duplicates within a run reuse the first fit from the cache.
// All selection randomness is drawn sequentially from the master seed; fits
// run in parallel on per-key derived streams, so the worker count never
// changes results.
GARecord run_ga(const GAConfig& config, const FitnessFn& fitness);

struct GenerationQuantiles {
  int generation = 0;
  double min = 0.0, q99 = 0.0, q975 = 0.0, q95 = 0.0, q90 = 0.0;
};

std::vector<GenerationQuantiles> generation_quantiles(const GARecord& record);

}  // namespace mortgp
