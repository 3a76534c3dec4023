/**
 * @file stats.hpp
 * @brief Cohort summary statistics, plot-ready exports and correlation.
 */
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lesioneval/ranking.hpp"

namespace lesioneval {

/// Quartiles use linear interpolation between closest ranks (the "inclusive"
/// method, numpy's default). `std` uses the n - 1 denominator and is absent
/// for a single value.
struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> std;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline constexpr const char *kQuartileMethod = "linear-inclusive";

SummaryStats summarize(std::span<const double> values);

/// Inclusive-method quantile of already sorted values, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

struct DistributionKey {
  std::string team;
  Region region;
  Metric metric;
  friend auto operator<=>(const DistributionKey &, const DistributionKey &) = default;
};

/// Per-case values (ordered by case id) grouped by (team, region, metric).
using DistributionExport = std::map<DistributionKey, std::vector<std::pair<std::string, double>>>;
DistributionExport distribution_export(std::span<const TeamCaseRecord> records);

struct CurvePoint {
  double volume = 0.0;
  double metric = 0.0;
};

/// Pairs are sorted by volume; point k averages pairs k .. k + window - 1.
/// Throws Error(Window) unless 1 <= window <= n.
std::vector<CurvePoint> sliding_window_curve(std::vector<CurvePoint> pairs,
                                             std::size_t window);

/// ceil(n / 10), at least 1.
std::size_t default_window(std::size_t n);

struct Correlation {
  double r = 0.0;
  double r_squared = 0.0;
  double p_value = 1.0; // two-sided
  std::size_t n = 0;
};

/// Pearson correlation with a two-sided p-value from Student's t with n - 2
/// degrees of freedom. Needs n >= 3; zero variance raises Error(Degenerate).
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value for correlation r over n samples.
double pearson_p_value(double r, std::size_t n);

} // namespace lesioneval
