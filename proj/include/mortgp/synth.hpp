#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mortgp/dataset.hpp"
#include "mortgp/expr.hpp"
#include "mortgp/fit.hpp"
#include "mortgp/scoring.hpp"

namespace mortgp {

// Ground-truth generative model for one synthetic mortality surface.
// Lengthscales are interpreted on the scaled [0,1] axes.
struct SyntheticSpec {
  std::string name;
  KernelExpr expr;
  std::vector<double> scales;       // slot order
  std::vector<double> leaf_params;  // preorder leaf order
  NoiseMode noise_mode = NoiseMode::Homoskedastic;
  double sigma2 = 0.0;
  double beta0 = 0.0;
  double beta_ag = 0.0;
  int age_lo = 50, age_hi = 84;
  int year_lo = 1990, year_hi = 2019;
  bool has_deaths_table = false;
  uint64_t default_seed = 1;

  int grid_size() const { return (age_hi - age_lo + 1) * (year_hi - year_lo + 1); }
  Theta theta() const;  // full hyperparameter vector in ModelLayout order
  std::string fitted_string() const;
};

// SYA / SYB / SYC per the synthetic experiment descriptions.
SyntheticSpec builtin_spec(const std::string& name);

// A JPN-female-shaped generative model on a 35 x 29 grid with by-deaths
// noise, used for end-to-end dry runs where real HMD data would be needed.
SyntheticSpec hmd_shaped_spec();

// Bundled synthetic deaths table: increases with age to a peak near 80 with a
// mild upward year trend. Strictly positive.
double synthetic_deaths(int age, int year);

// One exact MVN draw from the spec's prior over its grid; deterministic per
// seed. Deaths are carried through and exposures back-solved as D / exp(y).
MortalityDataset generate_surface(const SyntheticSpec& spec, uint64_t seed);

struct SweepCell {
  Family age_family;
  Family year_family;
  double bic = 0.0;
  double log_bf = 0.0;  // BIC(reference) - BIC(cell), reference = RBF_a * RBF_y
  bool failed = false;
};

struct SweepResult {
  // rows indexed by year family, columns by age family: {M12, M32, M52, RBF}
  std::array<std::array<SweepCell, 4>, 4> cells;
  static const std::array<Family, 4>& families();
};

// Fits all 16 age x year smoothness products and reports log Bayes factors
// against the RBF_a * RBF_y reference.
SweepResult smoothness_sweep(const MortalityDataset& data, const FitOptions& opts, int workers,
                             uint64_t seed);

// Coordinate multiset, additive component count and per-coordinate
// smooth/rough pattern; the level at which recovery is judged.
struct StructuralClass {
  int comps = 0;
  std::array<int, 3> leaves_per_coordinate{};
  std::array<bool, 3> rough{};
  std::array<bool, 3> smooth{};
  bool operator==(const StructuralClass&) const = default;
};

StructuralClass structural_class(const KernelExpr& expr);

// Amplitude of each top-level additive component: the product of the scale
// coefficients on its path times the constant offsets contributed by Min and
// Lin leaves (t0^2, sigma0^2). Stationary leaves contribute 1.
std::vector<double> component_amplitudes(const KernelExpr& expr,
                                         std::span<const double> scales,
                                         std::span<const double> leaf_params);

struct RecoveryEntry {
  int rank = 0;
  std::string canonical;
  double bic = 0.0;
  double bf_vs_best = 0.0;
  bool class_match = false;
  bool exact = false;
};

struct RecoveryVerdict {
  std::string truth_canonical;
  int truth_rank = -1;    // 1-based; -1 when the exact kernel was not found
  double truth_bf = 0.0;  // BF(truth, best); 0 when not found
  std::vector<RecoveryEntry> top;
};

RecoveryVerdict recovery_report(const SyntheticSpec& spec, const RankedKernels& ranked,
                                int top_k = 5);

}  // namespace mortgp
