#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "mortgp/kernels.hpp"

namespace mortgp {

enum class NoiseMode : uint8_t { Homoskedastic, ByDeaths };

const char* noise_mode_name(NoiseMode m);
NoiseMode noise_mode_from_name(const std::string& s);

// Per-coordinate (min, max) used to map raw inputs to the unit interval.
struct ScalingInfo {
  std::array<std::pair<double, double>, 3> minmax{};

  double span(Coordinate c) const {
    const auto& mm = minmax[static_cast<int>(c)];
    return mm.second - mm.first;
  }
  double scale(Coordinate c, double raw) const {
    const auto& mm = minmax[static_cast<int>(c)];
    return (raw - mm.first) / (mm.second - mm.first);
  }
};

// Grid observations plus scaling metadata. Rows are sorted by (age, year);
// immutable after construction and safe to share across threads.
struct MortalityDataset {
  std::vector<int> age, year, cohort;
  Eigen::VectorXd y;          // log mortality rate
  Eigen::VectorXd deaths;     // may be empty
  Eigen::VectorXd exposures;  // may be empty
  NoiseMode noise_mode = NoiseMode::Homoskedastic;
  ScalingInfo scaling;
  Eigen::MatrixXd X;  // n x 3 scaled (age, year, cohort) in [0,1]

  std::vector<int> unique_ages, unique_years;
  bool full_grid = false;

  int n() const { return static_cast<int>(y.size()); }
};

// Validates rows, sorts by (age, year), derives cohort = year - age, computes
// the unit-interval scaling and grid flags. Throws DataError on bad input.
MortalityDataset make_dataset(std::vector<int> age, std::vector<int> year,
                              Eigen::VectorXd y, Eigen::VectorXd deaths,
                              Eigen::VectorXd exposures, NoiseMode mode);

// Scaled coordinate triple for a raw (age, year) cell under `info`.
Eigen::RowVector3d scale_point(const ScalingInfo& info, double age, double year);

// Observation-noise diagonal: sigma2 repeated in homoskedastic mode,
// sigma2 / deaths_i under by-deaths noise.
Eigen::VectorXd noise_diagonal(const MortalityDataset& data, double sigma2);

}  // namespace mortgp
