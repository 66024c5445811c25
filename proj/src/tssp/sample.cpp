#include "tssp/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "tssp/error.hpp"

namespace tssp {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) fail(Errc::degenerate_sample, "a sample needs at least 2 values");
  for (double v : values_) {
    if (!std::isfinite(v)) fail(Errc::domain, "sample values must be finite");
  }
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

SampleMoments SampleMoments::of(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) fail(Errc::degenerate_sample, "moments need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  SampleMoments mom{mean, std::sqrt(ss / static_cast<double>(m - 1))};
  mom.validate();
  return mom;
}

void SampleMoments::validate() const {
  if (!std::isfinite(mean)) fail(Errc::domain, "sample mean is not finite");
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    fail(Errc::degenerate_sample, "sample standard deviation is zero");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::ifstream open_or_fail(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::input, "cannot open data file '" + path.string() + "'");
  return in;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',' || line[i] == ';' || line[i] == '\t' ||
        line[i] == ' ') {
      auto field = trim(line.substr(start, i - start));
      if (!field.empty()) fields.push_back(field);
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace

std::vector<double> load_values_csv(const std::filesystem::path& path) {
  auto in = open_or_fail(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto value = parse_number(text);
    if (!value) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      fail(Errc::input, path.string() + ":" + std::to_string(line_no) +
                            ": non-numeric value '" + std::string(text) + "'");
    }
    seen_content = true;
    values.push_back(*value);
  }
  if (values.empty()) fail(Errc::input, "data file '" + path.string() + "' holds no values");
  return values;
}

PairedSample load_pairs_csv(const std::filesystem::path& path) {
  auto in = open_or_fail(path);
  PairedSample pairs;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text);
    std::optional<double> x1, x2;
    if (fields.size() == 2) {
      x1 = parse_number(fields[0]);
      x2 = parse_number(fields[1]);
    }
    if (!x1 || !x2) {
      if (!seen_content) {
        seen_content = true;
        continue;
      }
      fail(Errc::input, path.string() + ":" + std::to_string(line_no) +
                            ": expected two numeric columns");
    }
    seen_content = true;
    pairs.first.push_back(*x1);
    pairs.second.push_back(*x2);
  }
  pairs.n1 = pairs.n2 = pairs.first.size();
  return pairs;
}

}  // namespace tssp
