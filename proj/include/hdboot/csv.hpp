#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdboot {

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

/// Parses a whole field as a double. @throws std::invalid_argument on failure.
double parse_number(const std::string& text);

/// Header plus string rows, written comma-separated with LF line endings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    void write(std::ostream& out) const;
    /// Index of a header column. @throws std::out_of_range if absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;

    /// Reads a table written by write(); every row must match the header width.
    static CsvTable read(std::istream& in);
};

/// Numeric matrix from comma-separated rows; optionally skips one header line.
/// @throws std::invalid_argument on ragged rows, bad numbers or empty input.
Eigen::MatrixXd read_matrix_csv(std::istream& in, bool skip_header = false);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path, bool skip_header = false);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace hdboot
