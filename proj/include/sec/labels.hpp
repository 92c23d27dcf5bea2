#pragma once

#include "sec/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace sec {

enum class LabelEncoding { pm1, zero_one };

/// One-vs-rest class assignment, c x N. Each column has exactly one
/// positive entry (+1 or 1); the rest are -1 (pm1) or 0 (zero_one).
class LabelMatrix {
public:
    LabelMatrix() = default;

    /// Validates and adopts `values`; throws InputError on violation.
    LabelMatrix(Matrix values, LabelEncoding encoding);

    static LabelMatrix from_class_ids(std::span<const int> ids, Index classes,
                                      LabelEncoding encoding);

    const Matrix& values() const noexcept { return values_; }
    LabelEncoding encoding() const noexcept { return encoding_; }
    Index classes() const noexcept { return values_.rows(); }
    Index samples() const noexcept { return values_.cols(); }

    std::vector<int> class_ids() const;
    LabelMatrix to(LabelEncoding encoding) const;
    LabelMatrix select_columns(std::span<const Index> columns) const;

    friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
        return a.encoding_ == b.encoding_ && a.values_.rows() == b.values_.rows() &&
               a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
    }

private:
    Matrix values_;
    LabelEncoding encoding_ = LabelEncoding::zero_one;
};

bool is_valid_label_matrix(const Matrix& values, LabelEncoding encoding);

/// Real-valued classifier outputs, c x N.
struct DecisionMatrix {
    Matrix values;
    std::string classifier_id;

    Index classes() const noexcept { return values.rows(); }
    Index samples() const noexcept { return values.cols(); }
};

/// Per-column argmax; ties go to the smallest class index.
std::vector<int> column_argmax(const Matrix& scores);

LabelMatrix harden_decisions(const DecisionMatrix& decisions);

Matrix select_columns(const Matrix& m, std::span<const Index> columns);

}  // namespace sec
