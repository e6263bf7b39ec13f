#include "nvdephase/delimited.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nvd {

Eigen::MatrixXd read_table(std::istream& in, int columns) {
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse '" + token + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != columns) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                               " columns, found " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(values.size()) / columns;
  Eigen::MatrixXd out(rows, columns);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (int j = 0; j < columns; ++j) out(i, j) = values[i * columns + j];
  }
  return out;
}

Eigen::MatrixXd read_table_file(const std::string& path, int columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return read_table(in, columns);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_table(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& rows,
                 char delimiter) {
  if (!header.empty()) {
    out << '#';
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? std::string(1, delimiter) : " ") << header[j];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) out << delimiter;
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
}

void write_table_file(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& rows, char delimiter) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_table(out, header, rows, delimiter);
}

}  // namespace nvd
