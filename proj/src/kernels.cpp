#include "mortgp/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "mortgp/errors.hpp"

namespace mortgp {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;
constexpr double kPi = 3.141592653589793;
}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::M12: return "M12";
    case Family::M32: return "M32";
    case Family::M52: return "M52";
    case Family::Chy: return "Chy";
    case Family::RBF: return "RBF";
    case Family::AR2: return "AR2";
    case Family::Lin: return "Lin";
    case Family::Min: return "Min";
    case Family::Meh: return "Meh";
  }
  return "?";
}

const char* coordinate_suffix(Coordinate c) {
  switch (c) {
    case Coordinate::Age: return "a";
    case Coordinate::Year: return "y";
    case Coordinate::Cohort: return "c";
  }
  return "?";
}

const char* coordinate_name(Coordinate c) {
  switch (c) {
    case Coordinate::Age: return "age";
    case Coordinate::Year: return "year";
    case Coordinate::Cohort: return "cohort";
  }
  return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
  if (name == "M12" || name == "Exp") return Family::M12;
  if (name == "M32") return Family::M32;
  if (name == "M52" || name == "Mat") return Family::M52;
  if (name == "Chy") return Family::Chy;
  if (name == "RBF") return Family::RBF;
  if (name == "AR2") return Family::AR2;
  if (name == "Lin") return Family::Lin;
  if (name == "Min") return Family::Min;
  if (name == "Meh") return Family::Meh;
  return std::nullopt;
}

std::optional<Coordinate> coordinate_from_suffix(std::string_view s) {
  if (s == "a") return Coordinate::Age;
  if (s == "y") return Coordinate::Year;
  if (s == "c") return Coordinate::Cohort;
  return std::nullopt;
}

int family_param_count(Family f) { return f == Family::AR2 ? 2 : 1; }

const char* family_param_name(Family f, int i) {
  switch (f) {
    case Family::AR2: return i == 0 ? "len" : "period";
    case Family::Lin: return "sigma0";
    case Family::Min: return "t0";
    case Family::Meh: return "rho";
    default: return "len";
  }
}

bool family_is_stationary(Family f) {
  switch (f) {
    case Family::M12:
    case Family::M32:
    case Family::M52:
    case Family::Chy:
    case Family::RBF:
    case Family::AR2: return true;
    default: return false;
  }
}

bool family_is_rough(Family f) {
  switch (f) {
    case Family::M12:
    case Family::Min:
    case Family::M32:
    case Family::AR2: return true;
    default: return false;
  }
}

bool family_is_nonstationary(Family f) {
  return f == Family::Lin || f == Family::Min || f == Family::Meh;
}

bool family_param_is_lengthscale_like(Family f, int i) {
  (void)i;
  return family_is_stationary(f);  // AR2's period is an axis distance too
}

void validate_base_kernel(const BaseKernel& k) {
  if (k.family == Family::Lin && k.coord != Coordinate::Year) {
    throw UsageError("Lin kernel is only legal on the year coordinate");
  }
  if (k.has_params()) {
    const int want = family_param_count(k.family);
    if (static_cast<int>(k.params.size()) != want) {
      throw UsageError(std::string(family_name(k.family)) + " expects " +
                       std::to_string(want) + " parameter(s), got " +
                       std::to_string(k.params.size()));
    }
    if (k.family == Family::Meh) {
      const double rho = k.params[0];
      if (!(rho > -1.0 && rho < 1.0)) {
        throw std::domain_error("Meh rho must lie in (-1, 1)");
      }
    } else {
      for (double p : k.params) {
        if (!(p > 0.0) || !std::isfinite(p)) {
          throw std::domain_error(std::string(family_name(k.family)) +
                                  " parameters must be positive finite");
        }
      }
    }
  }
}

double base_cov_value(Family f, const double* p, double u, double v) {
  const double d = u - v;
  const double r = std::abs(d);
  switch (f) {
    case Family::M12:
      return std::exp(-r / p[0]);
    case Family::M32: {
      const double s = kSqrt3 * r / p[0];
      return (1.0 + s) * std::exp(-s);
    }
    case Family::M52: {
      const double s = kSqrt5 * r / p[0];
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case Family::Chy:
      return 1.0 / (1.0 + d * d / (p[0] * p[0]));
    case Family::RBF:
      return std::exp(-d * d / (2.0 * p[0] * p[0]));
    case Family::AR2: {
      // Normalized reparameterized form: alpha = 1/len, omega = pi/period.
      const double len = p[0], per = p[1];
      const double w = kPi / per;
      return std::exp(-r / len) * (std::cos(w * r) + per / (kPi * len) * std::sin(w * r));
    }
    case Family::Lin:
      return p[0] * p[0] + u * v;
    case Family::Min:
      return p[0] * p[0] + std::min(u, v);
    case Family::Meh: {
      const double rho = p[0];
      const double num = rho * rho * (u * u + v * v) - 2.0 * rho * u * v;
      return std::exp(-num / (2.0 * (1.0 - rho * rho)));
    }
  }
  return 0.0;
}

void base_cov_value_grad(Family f, const double* p, double u, double v, double* out) {
  const double d = u - v;
  const double r = std::abs(d);
  switch (f) {
    case Family::M12: {
      const double len = p[0];
      const double k = std::exp(-r / len);
      out[0] = k;
      out[1] = k * r / (len * len);
      return;
    }
    case Family::M32: {
      const double len = p[0];
      const double s = kSqrt3 * r / len;
      const double e = std::exp(-s);
      out[0] = (1.0 + s) * e;
      out[1] = s * s * e / len;
      return;
    }
    case Family::M52: {
      const double len = p[0];
      const double s = kSqrt5 * r / len;
      const double e = std::exp(-s);
      out[0] = (1.0 + s + s * s / 3.0) * e;
      out[1] = s * s * (1.0 + s) * e / (3.0 * len);
      return;
    }
    case Family::Chy: {
      const double len = p[0];
      const double q = 1.0 + d * d / (len * len);
      const double k = 1.0 / q;
      out[0] = k;
      out[1] = k * k * 2.0 * d * d / (len * len * len);
      return;
    }
    case Family::RBF: {
      const double len = p[0];
      const double k = std::exp(-d * d / (2.0 * len * len));
      out[0] = k;
      out[1] = k * d * d / (len * len * len);
      return;
    }
    case Family::AR2: {
      const double len = p[0], per = p[1];
      const double w = kPi / per;
      const double e = std::exp(-r / len);
      const double c = std::cos(w * r), s = std::sin(w * r);
      out[0] = e * (c + per / (kPi * len) * s);
      // d/dlen: decay term and the per/(pi*len) prefactor both depend on len
      out[1] = e / (len * len) * (r * c + (r * per / (kPi * len) - per / kPi) * s);
      // d/dper: cos(pi r / per) and the sin prefactor both depend on per
      out[2] = e * ((kPi * r / (per * per)) * s + s / (kPi * len) - (r / (per * len)) * c);
      return;
    }
    case Family::Lin:
      out[0] = p[0] * p[0] + u * v;
      out[1] = 2.0 * p[0];
      return;
    case Family::Min:
      out[0] = p[0] * p[0] + std::min(u, v);
      out[1] = 2.0 * p[0];
      return;
    case Family::Meh: {
      const double rho = p[0];
      const double den = 2.0 * (1.0 - rho * rho);
      const double num = rho * rho * (u * u + v * v) - 2.0 * rho * u * v;
      const double k = std::exp(-num / den);
      const double dnum = 2.0 * rho * (u * u + v * v) - 2.0 * u * v;
      const double dden = -4.0 * rho;
      out[0] = k;
      out[1] = -k * (dnum * den - num * dden) / (den * den);
      return;
    }
  }
}

CovValue base_cov(const BaseKernel& k, double u, double v) {
  if (!k.has_params()) {
    throw std::invalid_argument("base_cov requires bound kernel parameters");
  }
  validate_base_kernel(k);
  CovValue out;
  out.n_params = family_param_count(k.family);
  double buf[3] = {0.0, 0.0, 0.0};
  base_cov_value_grad(k.family, k.params.data(), u, v, buf);
  out.value = buf[0];
  out.grad[0] = buf[1];
  if (out.n_params > 1) out.grad[1] = buf[2];
  return out;
}

ArMapping ar_mappings(double ell, std::optional<double> p, double span) {
  if (!(span > 0.0)) throw std::invalid_argument("ar_mappings: span must be positive");
  if (!(ell > 0.0)) throw std::invalid_argument("ar_mappings: lengthscale must be positive");
  ArMapping m;
  if (!p.has_value()) {
    m.phi1 = std::exp(-1.0 / (span * ell));
    return m;
  }
  if (!(*p > 0.0)) throw std::invalid_argument("ar_mappings: period must be positive");
  m.is_ar2 = true;
  m.phi2 = -std::exp(-2.0 / ell);
  m.phi1 = 2.0 * std::cos(kPi / *p) * std::sqrt(-m.phi2);
  return m;
}

}  // namespace mortgp
