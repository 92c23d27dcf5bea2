#pragma once

#include "sec/labels.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sec {

struct CsvOptions {
    bool header = false;
};

/// Rectangular numeric CSV as stored: one matrix row per file row.
/// Throws ParseError naming the offending row/column.
Matrix read_csv_matrix(const std::string& path, CsvOptions options = {});

/// Writes one matrix row per line with round-trip precision.
void write_csv_matrix(const std::string& path, const Matrix& rows);

/// Feature file with one sample per row, returned transposed as d x N.
Matrix load_view_csv(const std::string& path, CsvOptions options = {});

/// Integer class ids 0..c-1, one per row. When `classes` is empty the class
/// count is taken as max id + 1.
std::vector<int> load_class_ids(const std::string& path, std::optional<Index> classes = {},
                                CsvOptions options = {});

/// Class-id file expanded to a one-vs-rest pm1 label matrix.
LabelMatrix load_labels_csv(const std::string& path, std::optional<Index> classes = {},
                            CsvOptions options = {});

/// N rows x c decision scores, returned as a c x N decision matrix.
DecisionMatrix load_external_predictions(const std::string& path, Index expected_classes,
                                         Index expected_samples, CsvOptions options = {});

void write_predictions(const std::string& path, const DecisionMatrix& decisions);

/// t rows x c columns of 0/1 entries, one row per test point.
LabelMatrix read_label_matrix_csv(const std::string& path, CsvOptions options = {});
void write_label_matrix_csv(const std::string& path, const Matrix& values);

}  // namespace sec
