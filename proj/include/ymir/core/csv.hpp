#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ymir/core/timeseries.hpp"

namespace ymir {

/// Reads `timestamp,<m1>,...,<mn>`. Rows are sorted by timestamp; the grid
/// must be uniform and free of duplicates. `NaN` cells are kept as NaN.
TimeSeriesSet load_timeseries_csv(const std::filesystem::path& path);
TimeSeriesSet parse_timeseries_csv(std::istream& in, const std::string& source = "<stream>");

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeriesSet& ts);
void write_timeseries_csv(std::ostream& out, const TimeSeriesSet& ts);

enum class UnknownTimestamps { kReject, kSkip };

/// Reads `timestamp,label`; mask is true exactly at listed timestamps.
LabelSeries load_labels_csv(const std::filesystem::path& path, const TimeSeriesSet& ts,
                            UnknownTimestamps unknown = UnknownTimestamps::kReject);
LabelSeries parse_labels_csv(std::istream& in, const TimeSeriesSet& ts,
                             UnknownTimestamps unknown = UnknownTimestamps::kReject,
                             const std::string& source = "<stream>");

/// Writes only the labeled points.
void write_labels_csv(const std::filesystem::path& path, const LabelSeries& labels);

/// Shortest decimal text that parses back to exactly `v`; "NaN" for NaN.
std::string format_double(double v);

}  // namespace ymir
