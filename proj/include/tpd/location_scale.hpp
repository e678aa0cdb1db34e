#pragma once

#include <span>
#include <string>
#include <string_view>

namespace tpd {

/// Univariate (location, scale) pair plugged into every outlyingness.
///  - MeanStd: arithmetic mean, population standard deviation (1/n).
///  - MedianMad: median, raw median absolute deviation about the median
///    (no 1.4826 consistency factor).
/// Even-length medians are the midpoint of the two central order statistics.
enum class LocationScaleKind { MeanStd, MedianMad };

struct LocationScale {
  double location;
  double scale;
};

double location(std::span<const double> values, LocationScaleKind kind);
double scale(std::span<const double> values, LocationScaleKind kind);
LocationScale location_scale(std::span<const double> values, LocationScaleKind kind);

/// Median of `values`; reorders the buffer.
double median_inplace(std::span<double> values);

std::string_view to_string(LocationScaleKind kind);
LocationScaleKind parse_location_scale(std::string_view name);

}  // namespace tpd
