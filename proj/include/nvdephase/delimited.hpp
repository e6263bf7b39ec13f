#pragma once

// Plain delimited numeric tables: whitespace or comma separated, '#' comments.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace nvd {

/// Reads rows of exactly `columns` numbers. Throws std::runtime_error naming
/// the offending line on a malformed row.
Eigen::MatrixXd read_table(std::istream& in, int columns);
Eigen::MatrixXd read_table_file(const std::string& path, int columns);

/// Writes a '#'-prefixed header then one row per line, full round-trip precision.
void write_table(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& rows,
                 char delimiter = '\t');
void write_table_file(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& rows, char delimiter = '\t');

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace nvd
