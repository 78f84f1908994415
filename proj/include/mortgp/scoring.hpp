#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mortgp/fit.hpp"

namespace mortgp {

// BIC(k) = -mll + |theta| log(n) / 2; lower is better.
double bic(double mll, int n_hyperparams, int n);

// BF(k1, k2) = exp(BIC(k2) - BIC(k1)); values above 1 favor k1.
double bayes_factor(double bic_1, double bic_2);

enum class Evidence : uint8_t { Decisive, VeryStrong, Strong, Substantial, BareMention };

const char* evidence_name(Evidence e);
const char* evidence_code(Evidence e);  // "", ".", "*", "**", "***"

struct EvidenceResult {
  Evidence category = Evidence::BareMention;
  int direction = 0;  // +1 favors the first model, -1 the second, 0 neither
};

// Categorize max(bf, 1/bf) against the 1-3 / 3-10 / 10-30 / 30-100 / >100
// thresholds.
EvidenceResult jeffreys_category(double bf);

// BIC gap under which an alternative kernel still counts as plausible.
inline constexpr double kPlausibleBicGap = 6.802;

struct RankedEntry {
  std::string canonical;
  std::shared_ptr<const FitResult> best;
  int duplicate_count = 1;
};

struct RankedKernels {
  std::vector<RankedEntry> entries;  // ascending BIC
  int n_plausible = 0;               // non-best keys within kPlausibleBicGap of the top
};

// Groups by canonical key, keeps the min-BIC representative per key, sorts by
// (BIC, node length, canonical key). Failed fits (infinite BIC) sort last.
RankedKernels rank_and_dedup(const std::vector<std::shared_ptr<const FitResult>>& results);

struct SummaryRow {
  int lo = 0, hi = 0;  // 1-based inclusive rank range (after truncation)
  double bic_max = 0.0, bic_min = 0.0;
  double mean_leaves = 0.0;  // the paper's "len" column counts base kernels
  double mean_comps = 0.0;
  double pct_nonstationary = 0.0;
  double mean_age = 0.0, mean_year = 0.0, mean_cohort = 0.0;
  double pct_rough_age = 0.0, pct_rough_year = 0.0, pct_rough_cohort = 0.0;
  bool truncated = false;
};

std::vector<SummaryRow> summary_table(const RankedKernels& ranked,
                                      const std::vector<std::pair<int, int>>& ranges,
                                      std::vector<std::string>* warnings = nullptr);

// Refits the top n_top entries with tight options and fresh seeds, then
// re-ranks by the new BIC. Entries whose refit fails are dropped with a
// logged reason.
RankedKernels refit_top(const RankedKernels& ranked, int n_top, const FitOptions& tight,
                        const MortalityDataset& data, int workers,
                        std::vector<std::string>* warnings = nullptr);

}  // namespace mortgp
