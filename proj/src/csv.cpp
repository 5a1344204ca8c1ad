#include "hdboot/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hdboot {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_number(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return value;
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::invalid_argument("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
    auto emit = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::out_of_range("CsvTable: no column '" + name + "'");
}

CsvTable CsvTable::read(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("CsvTable: missing header");
    table.header = split_fields(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.add_row(split_fields(line));
    }
    return table;
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, bool skip_header) {
    std::string line;
    if (skip_header && !std::getline(in, line)) throw std::invalid_argument("matrix csv: missing header line");
    std::vector<std::vector<double>> rows;
    std::size_t line_no = skip_header ? 1 : 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const auto& field : split_fields(line)) {
            try {
                row.push_back(parse_number(field));
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("matrix csv line " + std::to_string(line_no) + ": not a number '" + field + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::invalid_argument("matrix csv line " + std::to_string(line_no) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("matrix csv: no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_matrix_csv(in, skip_header);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_number(m(i, j));
        }
        out << '\n';
    }
}

}  // namespace hdboot
