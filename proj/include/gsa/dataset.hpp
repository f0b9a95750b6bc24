#pragma once

// Given-data samples. CSV layout: header `x1,...,xd,y`, one observation per
// row, '.' as decimal point, no thousands separators; '#' lines are comments.

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/numeric.hpp"
#include "gsa/table_io.hpp"

namespace gsa {

/// Row-major so that one observation is a contiguous span.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DataSet {
  SampleMatrix x;     // n x d inputs
  Eigen::VectorXd y;  // n outputs

  DataSet() = default;
  DataSet(SampleMatrix inputs, Eigen::VectorXd outputs) : x(std::move(inputs)), y(std::move(outputs)) {
    if (x.rows() != y.size()) throw ContractError("data set: input and output row counts differ");
    if (x.rows() < 2) throw ContractError("data set needs at least two observations");
    if (!x.allFinite() || !y.allFinite()) throw ContractError("data set has non-finite entries");
  }

  Eigen::Index rows() const { return x.rows(); }
  int dimension() const { return static_cast<int>(x.cols()); }

  /// Rows listed in `index`, in that order.
  DataSet subset(const std::vector<Eigen::Index>& index) const {
    SampleMatrix xs(static_cast<Eigen::Index>(index.size()), x.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(index.size()));
    for (std::size_t r = 0; r < index.size(); ++r) {
      xs.row(static_cast<Eigen::Index>(r)) = x.row(index[r]);
      ys(static_cast<Eigen::Index>(r)) = y(index[r]);
    }
    return DataSet(std::move(xs), std::move(ys));
  }
};

inline void write_dataset(std::ostream& out, const DataSet& data, std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  for (int c = 0; c < data.dimension(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (int c = 0; c < data.dimension(); ++c) out << format_double(data.x(r, c)) << ',';
    out << format_double(data.y(r)) << '\n';
  }
}

inline DataSet read_dataset(std::istream& in) {
  std::string line;
  int columns = -1;
  std::vector<double> cells;
  Eigen::Index rows = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split_csv_line(view);
    if (columns < 0) {
      columns = static_cast<int>(fields.size());
      if (columns < 2) throw ParseError("data set: need at least one input column and y");
      for (int c = 0; c + 1 < columns; ++c) {
        if (detail::trim(fields[static_cast<std::size_t>(c)]) != "x" + std::to_string(c + 1)) {
          throw ParseError("data set: header must be x1,...,xd,y");
        }
      }
      if (detail::trim(fields.back()) != "y") throw ParseError("data set: last column must be y");
      continue;
    }
    if (static_cast<int>(fields.size()) != columns) {
      throw ParseError("data set line " + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " fields");
    }
    for (auto f : fields) cells.push_back(parse_double(f));
    ++rows;
  }
  if (columns < 0) throw ParseError("data set: missing header");
  if (rows < 2) throw ParseError("data set: need at least two rows");
  SampleMatrix x(rows, columns - 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < columns; ++c) x(r, c) = cells[static_cast<std::size_t>(r * columns + c)];
    y(r) = cells[static_cast<std::size_t>(r * columns + columns - 1)];
  }
  return DataSet(std::move(x), std::move(y));
}

}  // namespace gsa
