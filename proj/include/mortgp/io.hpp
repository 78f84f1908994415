#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mortgp/dataset.hpp"

namespace mortgp {

struct AgeYearRange {
  int age_lo = 0, age_hi = 0;
  int year_lo = 0, year_hi = 0;
};

struct DatasetSpec {
  std::string path;
  AgeYearRange range;
  NoiseMode noise_mode = NoiseMode::Homoskedastic;
};

struct LoadResult {
  MortalityDataset dataset;
  std::vector<std::string> warnings;
};

// Reads the `age,year,deaths,exposures` CSV schema, filters to the ranges,
// derives log-rates and cohorts, validates. Incomplete grids warn rather
// than fail. Throws DataError on schema or value problems.
LoadResult load_csv(const std::string& path, const AgeYearRange& range, NoiseMode mode);

// Full-file extent when no explicit ranges are given.
AgeYearRange csv_extent(const std::string& path);

void write_dataset_csv(const MortalityDataset& data, const std::string& path);

// Companion spec for robustness runs: ages widened by extra_age on each side,
// year range started extra_year earlier. Verifies that the file actually
// covers the expanded grid and names the first gaps otherwise.
DatasetSpec robustness_expand(const DatasetSpec& spec, int extra_age = 2, int extra_year = 2);

uint64_t fnv1a64_bytes(const void* data, size_t size);
std::string file_content_hash(const std::string& path);  // fnv1a64 as hex

}  // namespace mortgp
