#pragma once

// Labeled instance sets and per-date class-proportion tables, with their CSV forms.
//
// Dataset file:     header `D_in,K,count`, then rows `date,true_class,v_1,...,v_D_in`
//                   where true_class is 1-based or -1 when unknown.
// Proportion table: rows `date,p_1,...,p_K` in date order.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oslsp/diffcore.hpp"
#include "oslsp/ordinal.hpp"

namespace oslsp {

inline constexpr int kUnknownClass = -1;

struct Instance {
  std::string date;
  int true_class = kUnknownClass;  // 0-based; kUnknownClass when not annotated
  std::vector<double> input;
};

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::vector<Instance> instances;

  /// Stacks the selected instances (all when `indices` is empty) into a row matrix.
  diff::Matrix inputs(const std::vector<std::size_t>& indices = {}) const;
  std::vector<int> true_classes() const;
  /// Date labels in order of first appearance.
  std::vector<std::string> dates() const;
};

class ProportionTable {
 public:
  ProportionTable() = default;
  ProportionTable(std::vector<std::string> dates, std::vector<ProportionVector> rows);

  std::size_t num_classes() const { return rows_.empty() ? 0 : rows_.front().size(); }
  std::size_t size() const noexcept { return dates_.size(); }
  const std::vector<std::string>& dates() const noexcept { return dates_; }
  const std::vector<ProportionVector>& rows() const noexcept { return rows_; }
  std::optional<std::size_t> find(const std::string& date) const;
  /// Throws oslsp::Error naming the date when absent.
  const ProportionVector& at(const std::string& date) const;

 private:
  std::vector<std::string> dates_;
  std::vector<ProportionVector> rows_;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);
/// Throws ParseError carrying the 1-based line number of the first malformed row.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

void write_proportions(std::ostream& out, const ProportionTable& table);
void write_proportions(const std::filesystem::path& path, const ProportionTable& table);
ProportionTable read_proportions(std::istream& in);
ProportionTable read_proportions(const std::filesystem::path& path);

}  // namespace oslsp
