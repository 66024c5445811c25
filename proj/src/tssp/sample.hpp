#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace tssp {

// Measurements from the production line, kept together with a sorted copy.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::span<const double> sorted() const { return sorted_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

// Mean and (m-1)-denominator standard deviation.
struct SampleMoments {
  double mean = 0.0;
  double stddev = 1.0;

  static SampleMoments of(std::span<const double> values);
  void validate() const;
};

struct PairedSample {
  std::vector<double> first;   // stage-1 measurements
  std::vector<double> second;  // remeasurements of the same items
  std::size_t n1 = 0;          // stage-1 plan size
  std::size_t n2 = 0;          // stage-2 plan size
};

// One numeric value per line. A non-numeric first line is taken as a header;
// any later non-numeric line is an input error naming its line number.
std::vector<double> load_values_csv(const std::filesystem::path& path);

// Two numeric columns per line (comma, semicolon, tab or blank separated).
PairedSample load_pairs_csv(const std::filesystem::path& path);

}  // namespace tssp
