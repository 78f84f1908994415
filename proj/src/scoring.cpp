#include "mortgp/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mortgp/errors.hpp"
#include "mortgp/rng.hpp"

namespace mortgp {

double bic(double mll, int n_hyperparams, int n) {
  if (n < 1) throw std::invalid_argument("bic: n must be at least 1");
  return -mll + n_hyperparams * std::log(static_cast<double>(n)) / 2.0;
}

double bayes_factor(double bic_1, double bic_2) { return std::exp(bic_2 - bic_1); }

const char* evidence_name(Evidence e) {
  switch (e) {
    case Evidence::Decisive: return "decisive";
    case Evidence::VeryStrong: return "very_strong";
    case Evidence::Strong: return "strong";
    case Evidence::Substantial: return "substantial";
    case Evidence::BareMention: return "bare_mention";
  }
  return "?";
}

const char* evidence_code(Evidence e) {
  switch (e) {
    case Evidence::Decisive: return "";
    case Evidence::VeryStrong: return ".";
    case Evidence::Strong: return "*";
    case Evidence::Substantial: return "**";
    case Evidence::BareMention: return "***";
  }
  return "?";
}

EvidenceResult jeffreys_category(double bf) {
  if (!(bf > 0.0)) throw std::invalid_argument("Bayes factor must be positive");
  EvidenceResult out;
  out.direction = bf > 1.0 ? 1 : (bf < 1.0 ? -1 : 0);
  const double b = std::max(bf, 1.0 / bf);
  if (b > 100.0) {
    out.category = Evidence::Decisive;
  } else if (b > 30.0) {
    out.category = Evidence::VeryStrong;
  } else if (b > 10.0) {
    out.category = Evidence::Strong;
  } else if (b > 3.0) {
    out.category = Evidence::Substantial;
  } else {
    out.category = Evidence::BareMention;
  }
  return out;
}

RankedKernels rank_and_dedup(const std::vector<std::shared_ptr<const FitResult>>& results) {
  std::map<std::string, RankedEntry> groups;
  for (const auto& fr : results) {
    if (!fr) continue;
    const std::string key = fr->canonical.empty() ? canonical_form(fr->expr) : fr->canonical;
    auto [it, inserted] = groups.try_emplace(key);
    RankedEntry& entry = it->second;
    if (inserted) {
      entry.canonical = key;
      entry.best = fr;
      entry.duplicate_count = 1;
    } else {
      entry.duplicate_count += 1;
      if (fr->bic < entry.best->bic) entry.best = fr;
    }
  }

  RankedKernels out;
  out.entries.reserve(groups.size());
  for (auto& [key, entry] : groups) {
    if (entry.best->failed) continue;  // keys whose every fit failed carry no score
    out.entries.push_back(std::move(entry));
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.best->bic != b.best->bic) return a.best->bic < b.best->bic;
    const int la = a.best->expr.length(), lb = b.best->expr.length();
    if (la != lb) return la < lb;
    return a.canonical < b.canonical;
  });

  if (!out.entries.empty()) {
    const double best = out.entries.front().best->bic;
    for (size_t i = 1; i < out.entries.size(); ++i) {
      if (out.entries[i].best->bic - best <= kPlausibleBicGap) ++out.n_plausible;
    }
  }
  return out;
}

std::vector<SummaryRow> summary_table(const RankedKernels& ranked,
                                      const std::vector<std::pair<int, int>>& ranges,
                                      std::vector<std::string>* warnings) {
  if (ranked.entries.empty()) throw DataError("summary table requires a nonempty ranking");
  std::vector<SummaryRow> rows;
  const int total = static_cast<int>(ranked.entries.size());
  for (auto [lo, hi] : ranges) {
    SummaryRow row;
    row.lo = lo;
    if (lo < 1 || lo > total) {
      if (warnings) {
        warnings->push_back("summary range " + std::to_string(lo) + "-" + std::to_string(hi) +
                            " is outside the ranking (" + std::to_string(total) + " kernels)");
      }
      continue;
    }
    if (hi > total) {
      if (warnings) {
        warnings->push_back("summary range " + std::to_string(lo) + "-" + std::to_string(hi) +
                            " truncated to " + std::to_string(total) + " kernels");
      }
      hi = total;
      row.truncated = true;
    }
    row.hi = hi;
    const int count = hi - lo + 1;
    double bic_max = -std::numeric_limits<double>::infinity();
    double bic_min = std::numeric_limits<double>::infinity();
    for (int r = lo; r <= hi; ++r) {
      const RankedEntry& e = ranked.entries[r - 1];
      const ExprStats st = expr_stats(e.best->expr);
      bic_max = std::max(bic_max, e.best->bic);
      bic_min = std::min(bic_min, e.best->bic);
      row.mean_leaves += st.n_leaves;
      row.mean_comps += st.n_additive_components;
      row.pct_nonstationary += st.has_nonstationary ? 100.0 : 0.0;
      row.mean_age += st.leaves_per_coordinate[0];
      row.mean_year += st.leaves_per_coordinate[1];
      row.mean_cohort += st.leaves_per_coordinate[2];
      row.pct_rough_age += st.rough_by_coordinate[0] ? 100.0 : 0.0;
      row.pct_rough_year += st.rough_by_coordinate[1] ? 100.0 : 0.0;
      row.pct_rough_cohort += st.rough_by_coordinate[2] ? 100.0 : 0.0;
    }
    row.bic_max = bic_max;
    row.bic_min = bic_min;
    row.mean_leaves /= count;
    row.mean_comps /= count;
    row.pct_nonstationary /= count;
    row.mean_age /= count;
    row.mean_year /= count;
    row.mean_cohort /= count;
    row.pct_rough_age /= count;
    row.pct_rough_year /= count;
    row.pct_rough_cohort /= count;
    rows.push_back(row);
  }
  return rows;
}

RankedKernels refit_top(const RankedKernels& ranked, int n_top, const FitOptions& tight,
                        const MortalityDataset& data, int workers,
                        std::vector<std::string>* warnings) {
  const int k = std::min<int>(n_top, static_cast<int>(ranked.entries.size()));
  std::vector<std::shared_ptr<const FitResult>> refits(k);
  parallel_for(k, workers, [&](int i) {
    const RankedEntry& entry = ranked.entries[i];
    FitOptions opts = tight;
    opts.rng_seed = derive_seed(tight.rng_seed, entry.canonical, /*attempt=*/1);
    auto fr = std::make_shared<FitResult>(fit(entry.best->expr, data, opts));
    refits[i] = std::move(fr);
  });

  std::vector<std::shared_ptr<const FitResult>> pool;
  for (int i = 0; i < k; ++i) {
    if (refits[i]->failed) {
      if (warnings) {
        warnings->push_back("refit failed for " + ranked.entries[i].canonical + "; kernel dropped");
      }
      continue;
    }
    // preserve the duplicate counts by re-adding the refit once per duplicate
    for (int d = 0; d < ranked.entries[i].duplicate_count; ++d) pool.push_back(refits[i]);
  }
  for (size_t i = static_cast<size_t>(k); i < ranked.entries.size(); ++i) {
    for (int d = 0; d < ranked.entries[i].duplicate_count; ++d) {
      pool.push_back(ranked.entries[i].best);
    }
  }
  return rank_and_dedup(pool);
}

}  // namespace mortgp
