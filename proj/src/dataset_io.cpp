#include "oslsp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "oslsp/error.hpp"

namespace oslsp {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    fields.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("expected a number, got '" + std::string(s) + "'", line);
  }
  return v;
}

long long parse_int(std::string_view s, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("expected an integer, got '" + std::string(s) + "'", line);
  }
  return v;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace

diff::Matrix Dataset::inputs(const std::vector<std::size_t>& indices) const {
  const std::size_t n = indices.empty() ? instances.size() : indices.size();
  diff::Matrix m(n, input_dim);
  for (std::size_t r = 0; r < n; ++r) {
    const Instance& inst = instances[indices.empty() ? r : indices[r]];
    std::copy(inst.input.begin(), inst.input.end(), m.row_span(r).begin());
  }
  return m;
}

std::vector<int> Dataset::true_classes() const {
  std::vector<int> out;
  out.reserve(instances.size());
  for (const Instance& inst : instances) out.push_back(inst.true_class);
  return out;
}

std::vector<std::string> Dataset::dates() const {
  std::vector<std::string> out;
  for (const Instance& inst : instances) {
    if (std::find(out.begin(), out.end(), inst.date) == out.end()) out.push_back(inst.date);
  }
  return out;
}

ProportionTable::ProportionTable(std::vector<std::string> dates, std::vector<ProportionVector> rows)
    : dates_(std::move(dates)), rows_(std::move(rows)) {
  if (dates_.size() != rows_.size()) throw Error("proportion table: date/row count mismatch");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != rows_.front().size()) throw Error("proportion table: rows have differing class counts");
    for (std::size_t j = 0; j < i; ++j)
      if (dates_[j] == dates_[i]) throw Error("proportion table: duplicate date '" + dates_[i] + "'");
  }
}

std::optional<std::size_t> ProportionTable::find(const std::string& date) const {
  for (std::size_t i = 0; i < dates_.size(); ++i)
    if (dates_[i] == date) return i;
  return std::nullopt;
}

const ProportionVector& ProportionTable::at(const std::string& date) const {
  const auto i = find(date);
  if (!i) throw Error("unknown date label '" + date + "'");
  return rows_[*i];
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << data.input_dim << ',' << data.num_classes << ',' << data.instances.size() << '\n';
  for (const Instance& inst : data.instances) {
    out << inst.date << ',' << (inst.true_class == kUnknownClass ? -1 : inst.true_class + 1);
    for (double v : inst.input) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error("failed writing dataset");
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_dataset(out, data);
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Dataset data;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_fields(line);
    if (!have_header) {
      if (f.size() != 3) throw ParseError("header must be 'D_in,K,count'", line_no);
      const long long d = parse_int(f[0], line_no), k = parse_int(f[1], line_no), n = parse_int(f[2], line_no);
      if (d <= 0 || k < 2 || n < 0) throw ParseError("header values out of range", line_no);
      data.input_dim = static_cast<std::size_t>(d);
      data.num_classes = static_cast<std::size_t>(k);
      expected = static_cast<std::size_t>(n);
      data.instances.reserve(expected);
      have_header = true;
      continue;
    }
    if (f.size() != data.input_dim + 2) {
      throw ParseError("expected " + std::to_string(data.input_dim + 2) + " fields, got " + std::to_string(f.size()),
                       line_no);
    }
    if (f[0].empty()) throw ParseError("empty date label", line_no);
    Instance inst;
    inst.date = std::string(f[0]);
    const long long cls = parse_int(f[1], line_no);
    if (cls == -1) {
      inst.true_class = kUnknownClass;
    } else if (cls >= 1 && cls <= static_cast<long long>(data.num_classes)) {
      inst.true_class = static_cast<int>(cls - 1);
    } else {
      throw ParseError("true class " + std::to_string(cls) + " outside 1.." + std::to_string(data.num_classes), line_no);
    }
    inst.input.reserve(data.input_dim);
    for (std::size_t i = 2; i < f.size(); ++i) inst.input.push_back(parse_double(f[i], line_no));
    data.instances.push_back(std::move(inst));
  }
  if (!have_header) throw ParseError("dataset is empty", 0);
  if (data.instances.size() != expected) {
    throw ParseError("header promises " + std::to_string(expected) + " rows, found " +
                         std::to_string(data.instances.size()),
                     line_no);
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError(path.string());
  return read_dataset(in);
}

void write_proportions(std::ostream& out, const ProportionTable& table) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.dates()[i];
    for (double v : table.rows()[i].values()) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error("failed writing proportion table");
}

void write_proportions(const std::filesystem::path& path, const ProportionTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_proportions(out, table);
}

ProportionTable read_proportions(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> dates;
  std::vector<ProportionVector> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line.front() == '#') continue;
    const auto f = split_fields(line);
    if (f.size() < 3) throw ParseError("expected 'date,p_1,...,p_K' with K >= 2", line_no);
    std::vector<double> p;
    for (std::size_t i = 1; i < f.size(); ++i) p.push_back(parse_double(f[i], line_no));
    try {
      rows.emplace_back(std::move(p));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    dates.emplace_back(f[0]);
  }
  if (rows.empty()) throw ParseError("proportion table is empty", 0);
  try {
    return ProportionTable(std::move(dates), std::move(rows));
  } catch (const Error& e) {
    throw ParseError(e.what(), 0);
  }
}

ProportionTable read_proportions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError(path.string());
  return read_proportions(in);
}

}  // namespace oslsp
