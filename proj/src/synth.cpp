#include "mortgp/synth.hpp"

#include <cmath>
#include <map>

#include "mortgp/errors.hpp"
#include "mortgp/gp.hpp"

namespace mortgp {

Theta SyntheticSpec::theta() const {
  const ModelLayout layout = ModelLayout::of(expr);
  if (static_cast<int>(scales.size()) != layout.n_scales ||
      static_cast<int>(leaf_params.size()) != layout.n_leaf_params) {
    throw UsageError("synthetic spec parameters do not match the kernel layout");
  }
  Theta theta(layout.dim());
  theta[0] = beta0;
  theta[1] = beta_ag;
  for (size_t i = 0; i < scales.size(); ++i) theta[2 + i] = scales[i];
  for (size_t i = 0; i < leaf_params.size(); ++i) theta[2 + scales.size() + i] = leaf_params[i];
  theta[layout.sigma2_index()] = sigma2;
  return theta;
}

std::string SyntheticSpec::fitted_string() const {
  return format_fitted(expr, scales, leaf_params);
}

SyntheticSpec builtin_spec(const std::string& name) {
  SyntheticSpec spec;
  spec.name = name;
  if (name == "SYA") {
    spec.expr = parse_kernel("mul(RBF_a, RBF_y)");
    spec.scales = {0.04};
    spec.leaf_params = {0.4, 0.3};
    spec.noise_mode = NoiseMode::Homoskedastic;
    spec.sigma2 = 0.001;
    spec.beta0 = -5.0;
    spec.beta_ag = 3.4;
  } else if (name == "SYB") {
    spec.expr = parse_kernel("add(mul(RBF_a, M12_y), M52_c)");
    spec.scales = {0.08, 0.02};
    spec.leaf_params = {0.586, 13.33, 0.079};
    spec.noise_mode = NoiseMode::Homoskedastic;
    spec.sigma2 = 0.0004;
    spec.beta0 = -5.568;
    spec.beta_ag = 2.974;
  } else if (name == "SYC") {
    spec.expr = parse_kernel("mul(mul(M52_a, Min_y), mul(M12_c, Meh_c))");
    spec.scales = {0.0134};
    spec.leaf_params = {1.132, 0.877, 96.234, 0.8483};
    spec.noise_mode = NoiseMode::ByDeaths;
    spec.sigma2 = 1.0783;
    spec.beta0 = -3.165;
    spec.beta_ag = 3.380;
    spec.has_deaths_table = true;
  } else {
    throw UsageError("unknown synthetic case '" + name + "' (expected SYA, SYB or SYC)");
  }
  return spec;
}

SyntheticSpec hmd_shaped_spec() {
  SyntheticSpec spec;
  spec.name = "HMD-shaped";
  spec.expr = parse_kernel("mul(M52_a, mul(M12_y, M12_c))");
  spec.scales = {0.25};
  spec.leaf_params = {0.6, 2.0, 1.9};
  spec.noise_mode = NoiseMode::ByDeaths;
  spec.sigma2 = 1.1;
  spec.beta0 = -4.5;
  spec.beta_ag = 3.2;
  spec.year_hi = 2018;  // 35 x 29 grid
  spec.has_deaths_table = true;
  return spec;
}

double synthetic_deaths(int age, int year) {
  const double da = age - 80.0;
  const double base = 24000.0 * std::exp(-da * da / 338.0);
  const double trend = 1.0 + 0.004 * (year - 1990);
  return std::max(1.0, std::round(base * trend));
}

MortalityDataset generate_surface(const SyntheticSpec& spec, uint64_t seed) {
  if (spec.noise_mode == NoiseMode::ByDeaths && !spec.has_deaths_table) {
    throw UsageError("by_deaths synthetic spec requires a deaths table");
  }
  const int n_ages = spec.age_hi - spec.age_lo + 1;
  const int n_years = spec.year_hi - spec.year_lo + 1;
  const int n = n_ages * n_years;

  std::vector<int> age(n), year(n);
  Eigen::VectorXd deaths(n);
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      const int i = ia * n_years + iy;
      age[i] = spec.age_lo + ia;
      year[i] = spec.year_lo + iy;
      deaths[i] = spec.has_deaths_table ? synthetic_deaths(age[i], year[i]) : 1000.0;
    }
  }

  // scale coordinates directly from the grid ranges
  ScalingInfo scaling;
  scaling.minmax[0] = {spec.age_lo, spec.age_hi};
  scaling.minmax[1] = {spec.year_lo, spec.year_hi};
  scaling.minmax[2] = {spec.year_lo - spec.age_hi, spec.year_hi - spec.age_lo};
  Eigen::MatrixXd X(n, 3);
  for (int i = 0; i < n; ++i) {
    X.row(i) = scale_point(scaling, age[i], year[i]);
  }

  Eigen::VectorXd noise(n);
  if (spec.noise_mode == NoiseMode::Homoskedastic) {
    noise.setConstant(spec.sigma2);
  } else {
    for (int i = 0; i < n; ++i) noise[i] = spec.sigma2 / deaths[i];
  }

  Eigen::VectorXd y = sample_prior(spec.expr, spec.theta(), X, noise, 1, seed).col(0);

  Eigen::VectorXd exposures(n);
  for (int i = 0; i < n; ++i) exposures[i] = deaths[i] / std::exp(y[i]);

  return make_dataset(std::move(age), std::move(year), std::move(y), std::move(deaths),
                      std::move(exposures), spec.noise_mode);
}

const std::array<Family, 4>& SweepResult::families() {
  static const std::array<Family, 4> fams = {Family::M12, Family::M32, Family::M52, Family::RBF};
  return fams;
}

SweepResult smoothness_sweep(const MortalityDataset& data, const FitOptions& opts, int workers,
                             uint64_t seed) {
  if (data.unique_ages.size() < 2 || data.unique_years.size() < 2) {
    throw DataError("smoothness sweep requires an age x year grid");
  }
  const auto& fams = SweepResult::families();
  struct Task {
    int iy, ia;
    KernelExpr expr;
  };
  std::vector<Task> tasks;
  for (int iy = 0; iy < 4; ++iy) {
    for (int ia = 0; ia < 4; ++ia) {
      BaseKernel ka{fams[ia], Coordinate::Age, {}};
      BaseKernel ky{fams[iy], Coordinate::Year, {}};
      tasks.push_back({iy, ia,
                       KernelExpr(KernelExpr::Kind::Mul, KernelExpr(ka), KernelExpr(ky))});
    }
  }
  std::vector<FitResult> fits(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), workers, [&](int i) {
    FitOptions o = opts;
    o.rng_seed = derive_seed(seed, canonical_form(tasks[i].expr), 0);
    o.record_trace = false;
    fits[i] = fit(tasks[i].expr, data, o);
  });

  SweepResult out;
  double ref_bic = 0.0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    SweepCell& cell = out.cells[tasks[i].iy][tasks[i].ia];
    cell.age_family = fams[tasks[i].ia];
    cell.year_family = fams[tasks[i].iy];
    cell.failed = fits[i].failed;
    cell.bic = fits[i].bic;
    if (fams[tasks[i].ia] == Family::RBF && fams[tasks[i].iy] == Family::RBF) {
      ref_bic = fits[i].bic;
      if (fits[i].failed) throw NumericalError("smoothness sweep: reference fit failed");
    }
  }
  for (auto& row : out.cells) {
    for (auto& cell : row) {
      cell.log_bf = cell.failed ? std::numeric_limits<double>::quiet_NaN()
                                : ref_bic - cell.bic;
    }
  }
  return out;
}

StructuralClass structural_class(const KernelExpr& expr) {
  const ExprStats st = expr_stats(expr);
  StructuralClass cls;
  cls.comps = st.n_additive_components;
  cls.leaves_per_coordinate = st.leaves_per_coordinate;
  cls.rough = st.rough_by_coordinate;
  cls.smooth = st.smooth_by_coordinate;
  return cls;
}

namespace {

double leaf_offset_factor(Family f, const double* params) {
  if (f == Family::Min || f == Family::Lin) return params[0] * params[0];
  return 1.0;
}

void component_walk(const KernelExpr& node, double path_scale,
                    const std::map<const KernelExpr*, int>& slot_of,
                    const std::map<const KernelExpr*, int>& leaf_offset,
                    std::span<const double> scales, std::span<const double> leaf_params,
                    std::vector<double>& out) {
  auto it = slot_of.find(&node);
  if (it != slot_of.end()) path_scale *= scales[it->second];
  if (node.kind() == KernelExpr::Kind::Add) {
    component_walk(node.left(), path_scale, slot_of, leaf_offset, scales, leaf_params, out);
    component_walk(node.right(), path_scale, slot_of, leaf_offset, scales, leaf_params, out);
    return;
  }
  double amp = path_scale;
  for (const KernelExpr* leaf : leaves_preorder(node)) {
    const int off = leaf_offset.at(leaf);
    amp *= leaf_offset_factor(leaf->leaf().family, leaf_params.data() + off);
  }
  out.push_back(amp);
}

}  // namespace

std::vector<double> component_amplitudes(const KernelExpr& expr,
                                         std::span<const double> scales,
                                         std::span<const double> leaf_params) {
  const auto slots = enumerate_scale_slots(expr);
  std::map<const KernelExpr*, int> slot_of;
  for (size_t s = 0; s < slots.size(); ++s) slot_of[slots[s]] = static_cast<int>(s);

  std::map<const KernelExpr*, int> leaf_offset;
  int off = 0;
  for (const KernelExpr* leaf : leaves_preorder(expr)) {
    leaf_offset[leaf] = off;
    off += family_param_count(leaf->leaf().family);
  }

  std::vector<double> out;
  component_walk(expr, 1.0, slot_of, leaf_offset, scales, leaf_params, out);
  return out;
}

RecoveryVerdict recovery_report(const SyntheticSpec& spec, const RankedKernels& ranked,
                                int top_k) {
  RecoveryVerdict verdict;
  verdict.truth_canonical = canonical_form(spec.expr);
  const StructuralClass truth_class = structural_class(spec.expr);

  const double best_bic = ranked.entries.empty() ? 0.0 : ranked.entries.front().best->bic;
  for (size_t i = 0; i < ranked.entries.size(); ++i) {
    if (ranked.entries[i].canonical == verdict.truth_canonical) {
      verdict.truth_rank = static_cast<int>(i) + 1;
      verdict.truth_bf = bayes_factor(ranked.entries[i].best->bic, best_bic);
      break;
    }
  }
  const int k = std::min<int>(top_k, static_cast<int>(ranked.entries.size()));
  for (int i = 0; i < k; ++i) {
    const RankedEntry& e = ranked.entries[i];
    RecoveryEntry row;
    row.rank = i + 1;
    row.canonical = e.canonical;
    row.bic = e.best->bic;
    row.bf_vs_best = bayes_factor(e.best->bic, best_bic);
    row.class_match = structural_class(e.best->expr) == truth_class;
    row.exact = e.canonical == verdict.truth_canonical;
    verdict.top.push_back(std::move(row));
  }
  return verdict;
}

}  // namespace mortgp
