#include "sec/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sec {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, const std::string& path, Index row, Index col) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
        throw ParseError(path, row, col, "non-numeric cell '" + std::string(cell) + "'");
    if (!std::isfinite(value))
        throw ParseError(path, row, col, "non-finite cell '" + std::string(cell) + "'");
    return value;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path, CsvOptions options) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, 0, "cannot open file");

    std::vector<double> cells;
    Index width = -1;
    Index rows = 0;
    Index line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (options.header && line_no == 1) continue;
        if (trim(line).empty()) continue;

        Index col = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            ++col;
            cells.push_back(parse_cell(rest.substr(0, comma), path, line_no, col));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (width < 0)
            width = col;
        else if (col != width)
            throw ParseError(path, line_no, 0,
                             "row has " + std::to_string(col) + " columns, expected " +
                                 std::to_string(width));
        ++rows;
    }
    if (rows == 0) throw ParseError(path, 0, 0, "no data rows");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cells.data(), rows, width);
}

void write_csv_matrix(const std::string& path, const Matrix& rows) {
    auto out = open_for_write(path);
    for (Index i = 0; i < rows.rows(); ++i) {
        for (Index j = 0; j < rows.cols(); ++j) {
            if (j) out << ',';
            out << rows(i, j);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

Matrix load_view_csv(const std::string& path, CsvOptions options) {
    return read_csv_matrix(path, options).transpose();
}

std::vector<int> load_class_ids(const std::string& path, std::optional<Index> classes,
                                CsvOptions options) {
    const Matrix raw = read_csv_matrix(path, options);
    if (raw.cols() != 1)
        throw ParseError(path, 1, 2, "label file must have a single column");
    const Index first_row = options.header ? 2 : 1;

    std::vector<int> ids(static_cast<std::size_t>(raw.rows()));
    int max_id = 0;
    for (Index i = 0; i < raw.rows(); ++i) {
        const double v = raw(i, 0);
        if (v != std::floor(v) || v < 0 || v > std::numeric_limits<int>::max())
            throw ParseError(path, i + first_row, 1, "label must be a non-negative integer");
        ids[static_cast<std::size_t>(i)] = static_cast<int>(v);
        max_id = std::max(max_id, ids[static_cast<std::size_t>(i)]);
    }
    if (classes) {
        for (Index i = 0; i < raw.rows(); ++i)
            if (ids[static_cast<std::size_t>(i)] >= *classes)
                throw ParseError(path, i + first_row, 1,
                                 "label outside 0.." + std::to_string(*classes - 1));
    }
    return ids;
}

LabelMatrix load_labels_csv(const std::string& path, std::optional<Index> classes,
                            CsvOptions options) {
    const auto ids = load_class_ids(path, classes, options);
    Index c = classes.value_or(0);
    if (!classes)
        for (int id : ids) c = std::max<Index>(c, id + 1);
    return LabelMatrix::from_class_ids(ids, c, LabelEncoding::pm1);
}

DecisionMatrix load_external_predictions(const std::string& path, Index expected_classes,
                                         Index expected_samples, CsvOptions options) {
    const Matrix raw = read_csv_matrix(path, options);
    if (raw.cols() != expected_classes)
        throw ParseError(path, 0, 0,
                         "expected " + std::to_string(expected_classes) + " columns, found " +
                             std::to_string(raw.cols()));
    if (raw.rows() != expected_samples)
        throw ParseError(path, 0, 0,
                         "expected " + std::to_string(expected_samples) + " rows, found " +
                             std::to_string(raw.rows()));
    return {raw.transpose(), path};
}

void write_predictions(const std::string& path, const DecisionMatrix& decisions) {
    write_csv_matrix(path, decisions.values.transpose());
}

LabelMatrix read_label_matrix_csv(const std::string& path, CsvOptions options) {
    Matrix values = read_csv_matrix(path, options).transpose();
    if (!is_valid_label_matrix(values, LabelEncoding::zero_one))
        throw ParseError(path, 0, 0, "not a 0/1 label matrix with one 1 per row");
    return {std::move(values), LabelEncoding::zero_one};
}

void write_label_matrix_csv(const std::string& path, const Matrix& values) {
    write_csv_matrix(path, values.transpose());
}

}  // namespace sec
