#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mortgp {

enum class Coordinate : uint8_t { Age = 0, Year = 1, Cohort = 2 };

enum class Family : uint8_t { M12, M32, M52, Chy, RBF, AR2, Lin, Min, Meh };

inline constexpr int kNumCoordinates = 3;
inline constexpr int kNumFamilies = 9;

const char* family_name(Family f);
const char* coordinate_suffix(Coordinate c);  // "a", "y", "c"
const char* coordinate_name(Coordinate c);    // "age", "year", "cohort"

// Accepts canonical names plus the aliases Exp == M12 and Mat == M52.
std::optional<Family> family_from_name(std::string_view name);
std::optional<Coordinate> coordinate_from_suffix(std::string_view s);

int family_param_count(Family f);        // 2 for AR2, 1 otherwise
const char* family_param_name(Family f, int i);
bool family_is_stationary(Family f);     // M12 M32 M52 Chy RBF AR2
bool family_is_rough(Family f);          // C0/C1 sample paths: M12 Min M32 AR2
bool family_is_nonstationary(Family f);  // Lin Min Meh
// True when the parameter is an axis-distance quantity that back-transforms
// to the original scale by multiplying with the coordinate span.
bool family_param_is_lengthscale_like(Family f, int i);

struct BaseKernel {
  Family family = Family::M12;
  Coordinate coord = Coordinate::Age;
  std::vector<double> params;  // empty until bound by the fitter

  bool has_params() const { return !params.empty(); }
};

// Throws UsageError on structural problems (Lin off the year axis, wrong
// param count) and std::domain_error on out-of-domain parameter values.
void validate_base_kernel(const BaseKernel& k);

struct CovValue {
  double value = 0.0;
  std::array<double, 2> grad{};  // d k / d param_i (constrained parameters)
  int n_params = 0;
};

// Closed-form covariance value with exact parameter partials. u, v are the
// scaled [0,1] coordinate values of the kernel's own axis.
CovValue base_cov(const BaseKernel& k, double u, double v);

double base_cov_value(Family f, const double* p, double u, double v);
// out[0] = value, out[1..n_params] = partials
void base_cov_value_grad(Family f, const double* p, double u, double v, double* out);

struct ArMapping {
  double phi1 = 0.0;
  double phi2 = 0.0;  // only set in AR2 mode
  bool is_ar2 = false;
};

// M12 mode (no p): phi1 = exp(-1/(span*ell)) for ell on the scaled axis.
// AR2 mode: phi2 = -exp(-2/ell), phi1 = 2 cos(pi/p) sqrt(-phi2), with ell and
// p taken on the caller's chosen scale.
ArMapping ar_mappings(double ell, std::optional<double> p, double span);

}  // namespace mortgp
