#include "ymir/core/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "ymir/error.hpp"

namespace ymir {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

std::int64_t parse_epoch(std::string_view cell, const std::string& source, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(where(source, line_no) + ": bad timestamp '" + std::string(cell) + "'");
  }
  return v;
}

double parse_value(std::string_view cell, const std::string& source, std::size_t line_no) {
  if (cell == "NaN" || cell == "nan" || cell == "NAN") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || std::isinf(v)) {
    throw ParseError(where(source, line_no) + ": bad value '" + std::string(cell) + "'");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructureError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

TimeSeriesSet parse_timeseries_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw StructureError(source + ": empty file");
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header[0]) != "timestamp") {
    throw ParseError(where(source, line_no) + ": header must be 'timestamp,<metric>...'");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i < header.size(); ++i) names.emplace_back(trim(header[i]));
  const std::size_t n = names.size();

  struct Row {
    std::int64_t ts;
    std::size_t line;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto cells = split_commas(text);
    if (cells.size() != n + 1) {
      throw ParseError(where(source, line_no) + ": expected " + std::to_string(n + 1) +
                       " columns, found " + std::to_string(cells.size()));
    }
    Row row{parse_epoch(trim(cells[0]), source, line_no), line_no, {}};
    row.values.reserve(n);
    for (std::size_t j = 0; j < n; ++j) row.values.push_back(parse_value(trim(cells[j + 1]), source, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw StructureError(source + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ts == rows[i - 1].ts) {
      throw StructureError(where(source, rows[i].line) + ": duplicate timestamp " +
                           std::to_string(rows[i].ts));
    }
  }

  std::vector<std::int64_t> timestamps;
  timestamps.reserve(rows.size());
  Matrix values(rows.size(), n);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    timestamps.push_back(rows[t].ts);
    std::copy(rows[t].values.begin(), rows[t].values.end(), values.row(t).begin());
  }
  return TimeSeriesSet::make(std::move(timestamps), std::move(values), std::move(names));
}

TimeSeriesSet load_timeseries_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_timeseries_csv(in, path.string());
}

void write_timeseries_csv(std::ostream& out, const TimeSeriesSet& ts) {
  out << "timestamp";
  for (const auto& name : ts.metric_names()) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < ts.length(); ++t) {
    out << ts.timestamps()[t];
    for (std::size_t j = 0; j < ts.metric_count(); ++j) out << ',' << format_double(ts.at(t, j));
    out << '\n';
  }
}

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeriesSet& ts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructureError("cannot write '" + path.string() + "'");
  write_timeseries_csv(out, ts);
}

LabelSeries parse_labels_csv(std::istream& in, const TimeSeriesSet& ts, UnknownTimestamps unknown,
                             const std::string& source) {
  LabelSeries out = LabelSeries::empty(ts.timestamps());
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(ts.length());
  for (std::size_t t = 0; t < ts.length(); ++t) index.emplace(ts.timestamps()[t], t);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return out;
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() != 2 || trim(header[0]) != "timestamp" || trim(header[1]) != "label") {
    throw ParseError(where(source, line_no) + ": header must be 'timestamp,label'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto cells = split_commas(text);
    if (cells.size() != 2) {
      throw ParseError(where(source, line_no) + ": expected 2 columns, found " +
                       std::to_string(cells.size()));
    }
    const std::int64_t epoch = parse_epoch(trim(cells[0]), source, line_no);
    const auto label_text = trim(cells[1]);
    if (label_text != "0" && label_text != "1") {
      throw ParseError(where(source, line_no) + ": label must be 0 or 1, got '" +
                       std::string(label_text) + "'");
    }
    const auto it = index.find(epoch);
    if (it == index.end()) {
      if (unknown == UnknownTimestamps::kSkip) continue;
      throw AlignmentError(where(source, line_no) + ": timestamp " + std::to_string(epoch) +
                           " not present in the data");
    }
    out.labels[it->second] = label_text == "1" ? 1 : 0;
    out.mask[it->second] = true;
  }
  return out;
}

LabelSeries load_labels_csv(const std::filesystem::path& path, const TimeSeriesSet& ts,
                            UnknownTimestamps unknown) {
  auto in = open_input(path);
  return parse_labels_csv(in, ts, unknown, path.string());
}

void write_labels_csv(const std::filesystem::path& path, const LabelSeries& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructureError("cannot write '" + path.string() + "'");
  out << "timestamp,label\n";
  for (std::size_t t = 0; t < labels.length(); ++t) {
    if (labels.mask[t]) out << labels.timestamps[t] << ',' << labels.labels[t] << '\n';
  }
}

}  // namespace ymir
