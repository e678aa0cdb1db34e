#include "tpd/location_scale.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tpd/errors.hpp"

namespace tpd {

namespace {

void require_nonempty(std::span<const double> values) {
  if (values.empty()) throw DomainError("location/scale of an empty sequence");
}

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double std_about(std::span<const double> values, double mu) {
  double s = 0.0;
  for (double v : values) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(values.size()));
}

}  // namespace

double median_inplace(std::span<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

LocationScale location_scale(std::span<const double> values, LocationScaleKind kind) {
  require_nonempty(values);
  if (kind == LocationScaleKind::MeanStd) {
    const double mu = mean_of(values);
    return {mu, std_about(values, mu)};
  }
  std::vector<double> buf(values.begin(), values.end());
  const double med = median_inplace(buf);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = std::abs(values[i] - med);
  return {med, median_inplace(buf)};
}

double location(std::span<const double> values, LocationScaleKind kind) {
  require_nonempty(values);
  if (kind == LocationScaleKind::MeanStd) return mean_of(values);
  std::vector<double> buf(values.begin(), values.end());
  return median_inplace(buf);
}

double scale(std::span<const double> values, LocationScaleKind kind) {
  return location_scale(values, kind).scale;
}

std::string_view to_string(LocationScaleKind kind) {
  return kind == LocationScaleKind::MeanStd ? "meanstd" : "medmad";
}

LocationScaleKind parse_location_scale(std::string_view name) {
  if (name == "meanstd") return LocationScaleKind::MeanStd;
  if (name == "medmad") return LocationScaleKind::MedianMad;
  throw FormatError("unknown location-scale '" + std::string(name) + "' (expected meanstd or medmad)");
}

}  // namespace tpd
