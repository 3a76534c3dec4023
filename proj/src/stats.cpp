#include "lesioneval/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>

namespace lesioneval {

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty())
    throw Error(ErrorCode::EmptyInput, "quantile of an empty list");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty())
    throw Error(ErrorCode::EmptyInput, "cannot summarize an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.n = sorted.size();
  double sum = 0.0;
  for (double v : values)
    sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = sorted_quantile(sorted, 0.25);
  s.median = sorted_quantile(sorted, 0.5);
  s.q3 = sorted_quantile(sorted, 0.75);
  return s;
}

DistributionExport distribution_export(std::span<const TeamCaseRecord> records) {
  DistributionExport out;
  for (const auto &r : records) {
    out[{r.team, r.region, Metric::Dice}].emplace_back(r.case_id,
                                                       r.lesionwise_dice);
    out[{r.team, r.region, Metric::HD95}].emplace_back(r.case_id,
                                                       r.lesionwise_hd95);
  }
  for (auto &[key, values] : out)
    std::stable_sort(values.begin(), values.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
  return out;
}

std::size_t default_window(std::size_t n) {
  return std::max<std::size_t>(1, (n + 9) / 10);
}

std::vector<CurvePoint> sliding_window_curve(std::vector<CurvePoint> pairs,
                                             std::size_t window) {
  if (window < 1 || window > pairs.size())
    throw Error(ErrorCode::Window, "window must be between 1 and " +
                                       std::to_string(pairs.size()));
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto &a, const auto &b) { return a.volume < b.volume; });
  std::vector<CurvePoint> out;
  out.reserve(pairs.size() - window + 1);
  const auto w = static_cast<double>(window);
  for (std::size_t k = 0; k + window <= pairs.size(); ++k) {
    // Summed per window rather than with a running total so every point is
    // independent of accumulated rounding.
    double v = 0.0, m = 0.0;
    for (std::size_t j = k; j < k + window; ++j) {
      v += pairs[j].volume;
      m += pairs[j].metric;
    }
    out.push_back({v / w, m / w});
  }
  return out;
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3)
    throw Error(ErrorCode::InvalidArgument, "p-value needs n >= 3");
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0)
    return 0.0;
  // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2) with t^2 = r^2 df / (1 - r^2).
  const double x = (1.0 - r2); // df / (df + t^2) simplifies to 1 - r^2
  return boost::math::ibeta(0.5 * df, 0.5, x);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::InvalidArgument, "series lengths differ");
  if (x.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "correlation needs n >= 3");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::Degenerate, "zero variance in correlation input");
  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.r_squared = c.r * c.r;
  c.p_value = pearson_p_value(c.r, c.n);
  return c;
}

} // namespace lesioneval
