#include "mortgp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mortgp/errors.hpp"

namespace mortgp {

namespace {

struct RawRows {
  std::vector<int> age, year;
  std::vector<double> deaths, exposures;
};

std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

RawRows read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  if (strip_cr(line) != "age,year,deaths,exposures") {
    throw DataError("'" + path + "': expected header 'age,year,deaths,exposures'");
  }
  RawRows rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const size_t comma = line.find(',', start);
      if (f < 3) {
        if (comma == std::string::npos) {
          throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        }
        fields[f] = line.substr(start, comma - start);
        start = comma + 1;
      } else {
        if (comma != std::string::npos) {
          throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        }
        fields[f] = line.substr(start);
      }
    }
    auto parse_int = [&](const std::string& s) {
      int v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad integer '" + s + "'");
      }
      return v;
    };
    auto parse_double = [&](const std::string& s) {
      double v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      return v;
    };
    rows.age.push_back(parse_int(fields[0]));
    rows.year.push_back(parse_int(fields[1]));
    rows.deaths.push_back(parse_double(fields[2]));
    rows.exposures.push_back(parse_double(fields[3]));
  }
  if (rows.age.empty()) throw DataError("'" + path + "' has no data rows");
  return rows;
}

}  // namespace

AgeYearRange csv_extent(const std::string& path) {
  RawRows rows = read_raw(path);
  AgeYearRange r;
  r.age_lo = *std::min_element(rows.age.begin(), rows.age.end());
  r.age_hi = *std::max_element(rows.age.begin(), rows.age.end());
  r.year_lo = *std::min_element(rows.year.begin(), rows.year.end());
  r.year_hi = *std::max_element(rows.year.begin(), rows.year.end());
  return r;
}

LoadResult load_csv(const std::string& path, const AgeYearRange& range, NoiseMode mode) {
  if (range.age_lo > range.age_hi || range.year_lo > range.year_hi) {
    throw DataError("empty age or year range");
  }
  RawRows raw = read_raw(path);

  std::vector<int> age, year;
  std::vector<double> deaths, exposures;
  for (size_t i = 0; i < raw.age.size(); ++i) {
    if (raw.age[i] < range.age_lo || raw.age[i] > range.age_hi) continue;
    if (raw.year[i] < range.year_lo || raw.year[i] > range.year_hi) continue;
    age.push_back(raw.age[i]);
    year.push_back(raw.year[i]);
    deaths.push_back(raw.deaths[i]);
    exposures.push_back(raw.exposures[i]);
  }
  if (age.empty()) throw DataError("'" + path + "': no rows left after range filtering");

  Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(deaths.data(), deaths.size());
  Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(exposures.data(), exposures.size());
  LoadResult out{make_dataset(std::move(age), std::move(year), Eigen::VectorXd(), std::move(d),
                              std::move(e), mode),
                 {}};

  const size_t have = out.dataset.age.size();
  const size_t want = static_cast<size_t>(range.age_hi - range.age_lo + 1) *
                      static_cast<size_t>(range.year_hi - range.year_lo + 1);
  if (have < want) {
    out.warnings.push_back("grid incomplete: " + std::to_string(want - have) + " of " +
                           std::to_string(want) + " cells missing");
  }
  return out;
}

void write_dataset_csv(const MortalityDataset& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("age,year,deaths,exposures\n", f);
  for (int i = 0; i < data.n(); ++i) {
    const double d = data.deaths.size() ? data.deaths[i] : 0.0;
    const double e = data.exposures.size() ? data.exposures[i] : 0.0;
    std::fprintf(f, "%d,%d,%.12g,%.12g\n", data.age[i], data.year[i], d, e);
  }
  std::fclose(f);
}

DatasetSpec robustness_expand(const DatasetSpec& spec, int extra_age, int extra_year) {
  if (extra_age < 0 || extra_year < 0) throw UsageError("expansion amounts must be nonnegative");
  DatasetSpec out = spec;
  out.range.age_lo -= extra_age;
  out.range.age_hi += extra_age;
  out.range.year_lo -= extra_year;

  if (extra_age == 0 && extra_year == 0) return out;

  RawRows raw = read_raw(spec.path);
  std::set<std::pair<int, int>> cells;
  for (size_t i = 0; i < raw.age.size(); ++i) cells.insert({raw.age[i], raw.year[i]});
  std::string gaps;
  int n_gaps = 0;
  for (int a = out.range.age_lo; a <= out.range.age_hi; ++a) {
    for (int y = out.range.year_lo; y <= out.range.year_hi; ++y) {
      if (!cells.count({a, y})) {
        if (n_gaps < 10) gaps += " (" + std::to_string(a) + "," + std::to_string(y) + ")";
        ++n_gaps;
      }
    }
  }
  if (n_gaps > 0) {
    throw DataError("expansion exceeds file coverage; missing cells:" + gaps +
                    (n_gaps > 10 ? " ..." : ""));
  }
  return out;
}

uint64_t fnv1a64_bytes(const void* data, size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for hashing");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64_bytes(bytes.data(), bytes.size())));
  return buf;
}

}  // namespace mortgp
