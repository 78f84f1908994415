#include "mortgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mortgp/errors.hpp"

namespace mortgp {

const char* noise_mode_name(NoiseMode m) {
  return m == NoiseMode::Homoskedastic ? "homoskedastic" : "by_deaths";
}

NoiseMode noise_mode_from_name(const std::string& s) {
  if (s == "homoskedastic") return NoiseMode::Homoskedastic;
  if (s == "by_deaths") return NoiseMode::ByDeaths;
  throw DataError("unknown noise mode '" + s + "'");
}

MortalityDataset make_dataset(std::vector<int> age, std::vector<int> year,
                              Eigen::VectorXd y, Eigen::VectorXd deaths,
                              Eigen::VectorXd exposures, NoiseMode mode) {
  const size_t n = age.size();
  if (n == 0) throw DataError("dataset is empty");
  if (year.size() != n) throw DataError("age/year column size mismatch");
  if (y.size() != 0 && static_cast<size_t>(y.size()) != n)
    throw DataError("log-rate column size mismatch");
  if (deaths.size() != 0 && static_cast<size_t>(deaths.size()) != n)
    throw DataError("deaths column size mismatch");
  if (exposures.size() != 0 && static_cast<size_t>(exposures.size()) != n)
    throw DataError("exposures column size mismatch");

  if (y.size() == 0) {
    if (deaths.size() == 0 || exposures.size() == 0)
      throw DataError("need either log-rates or deaths+exposures");
    y.resize(n);
    for (size_t i = 0; i < n; ++i) {
      if (!(exposures[i] > 0.0))
        throw DataError("non-positive exposures at age " + std::to_string(age[i]) +
                        ", year " + std::to_string(year[i]));
      if (!(deaths[i] > 0.0))
        throw DataError("non-positive deaths (log-rate undefined) at age " +
                        std::to_string(age[i]) + ", year " + std::to_string(year[i]));
      y[i] = std::log(deaths[i] / exposures[i]);
    }
  }

  if (mode == NoiseMode::ByDeaths) {
    if (deaths.size() == 0) throw DataError("by_deaths noise requires a deaths column");
    std::string bad;
    int nbad = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!(deaths[i] > 0.0)) {
        if (nbad < 20) bad += " (" + std::to_string(age[i]) + "," + std::to_string(year[i]) + ")";
        ++nbad;
      }
    }
    if (nbad > 0) {
      throw DataError("by_deaths noise requires deaths > 0; offending cells:" + bad +
                      (nbad > 20 ? " ..." : ""));
    }
  }

  // sort rows by (age, year)
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::make_pair(age[a], year[a]) < std::make_pair(age[b], year[b]);
  });

  MortalityDataset ds;
  ds.noise_mode = mode;
  ds.age.resize(n);
  ds.year.resize(n);
  ds.cohort.resize(n);
  ds.y.resize(n);
  if (deaths.size()) ds.deaths.resize(n);
  if (exposures.size()) ds.exposures.resize(n);

  std::set<std::pair<int, int>> seen;
  for (size_t i = 0; i < n; ++i) {
    const size_t j = order[i];
    if (!seen.insert({age[j], year[j]}).second) {
      throw DataError("duplicate (age, year) cell: (" + std::to_string(age[j]) + "," +
                      std::to_string(year[j]) + ")");
    }
    ds.age[i] = age[j];
    ds.year[i] = year[j];
    ds.cohort[i] = year[j] - age[j];
    ds.y[i] = y[j];
    if (deaths.size()) ds.deaths[i] = deaths[j];
    if (exposures.size()) ds.exposures[i] = exposures[j];
    if (!std::isfinite(ds.y[i]))
      throw DataError("non-finite log-rate at age " + std::to_string(age[j]) + ", year " +
                      std::to_string(year[j]));
  }

  auto minmax_of = [&](const std::vector<int>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return std::make_pair(static_cast<double>(*lo), static_cast<double>(*hi));
  };
  ds.scaling.minmax[0] = minmax_of(ds.age);
  ds.scaling.minmax[1] = minmax_of(ds.year);
  ds.scaling.minmax[2] = minmax_of(ds.cohort);
  for (int c = 0; c < 3; ++c) {
    if (!(ds.scaling.minmax[c].second > ds.scaling.minmax[c].first)) {
      throw DataError(std::string("degenerate ") + coordinate_name(Coordinate(c)) +
                      " coordinate: need at least two distinct values");
    }
  }

  ds.X.resize(n, 3);
  for (size_t i = 0; i < n; ++i) {
    ds.X(i, 0) = ds.scaling.scale(Coordinate::Age, ds.age[i]);
    ds.X(i, 1) = ds.scaling.scale(Coordinate::Year, ds.year[i]);
    ds.X(i, 2) = ds.scaling.scale(Coordinate::Cohort, ds.cohort[i]);
  }

  std::set<int> ages(ds.age.begin(), ds.age.end());
  std::set<int> years(ds.year.begin(), ds.year.end());
  ds.unique_ages.assign(ages.begin(), ages.end());
  ds.unique_years.assign(years.begin(), years.end());
  ds.full_grid = ds.unique_ages.size() * ds.unique_years.size() == n;
  return ds;
}

Eigen::RowVector3d scale_point(const ScalingInfo& info, double age, double year) {
  Eigen::RowVector3d x;
  x(0) = info.scale(Coordinate::Age, age);
  x(1) = info.scale(Coordinate::Year, year);
  x(2) = info.scale(Coordinate::Cohort, year - age);
  return x;
}

Eigen::VectorXd noise_diagonal(const MortalityDataset& data, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("noise scale must be positive");
  const int n = data.n();
  Eigen::VectorXd d(n);
  if (data.noise_mode == NoiseMode::Homoskedastic) {
    d.setConstant(sigma2);
    return d;
  }
  if (data.deaths.size() != n)
    throw DataError("by_deaths noise requires a deaths column");
  for (int i = 0; i < n; ++i) {
    if (!(data.deaths[i] > 0.0)) throw DataError("by_deaths noise requires deaths > 0");
    d[i] = sigma2 / data.deaths[i];
  }
  return d;
}

}  // namespace mortgp
