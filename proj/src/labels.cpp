#include "sec/labels.hpp"

namespace sec {

namespace {

double positive_value(LabelEncoding) { return 1.0; }
double negative_value(LabelEncoding e) { return e == LabelEncoding::pm1 ? -1.0 : 0.0; }

}  // namespace

bool is_valid_label_matrix(const Matrix& values, LabelEncoding encoding) {
    const double pos = positive_value(encoding);
    const double neg = negative_value(encoding);
    for (Index j = 0; j < values.cols(); ++j) {
        int positives = 0;
        for (Index i = 0; i < values.rows(); ++i) {
            const double v = values(i, j);
            if (v == pos)
                ++positives;
            else if (v != neg)
                return false;
        }
        if (positives != 1) return false;
    }
    return values.rows() > 0;
}

LabelMatrix::LabelMatrix(Matrix values, LabelEncoding encoding)
    : values_(std::move(values)), encoding_(encoding) {
    if (!is_valid_label_matrix(values_, encoding_))
        throw InputError(std::string("matrix is not a valid ") +
                         (encoding_ == LabelEncoding::pm1 ? "pm1" : "zero_one") +
                         " label matrix");
}

LabelMatrix LabelMatrix::from_class_ids(std::span<const int> ids, Index classes,
                                        LabelEncoding encoding) {
    if (classes < 1) throw InputError("label matrix needs at least one class");
    Matrix values = Matrix::Constant(classes, static_cast<Index>(ids.size()), negative_value(encoding));
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (ids[j] < 0 || ids[j] >= classes)
            throw InputError("class id " + std::to_string(ids[j]) + " outside 0.." +
                             std::to_string(classes - 1));
        values(ids[j], static_cast<Index>(j)) = positive_value(encoding);
    }
    LabelMatrix out;
    out.values_ = std::move(values);
    out.encoding_ = encoding;
    return out;
}

std::vector<int> LabelMatrix::class_ids() const { return column_argmax(values_); }

LabelMatrix LabelMatrix::to(LabelEncoding encoding) const {
    if (encoding == encoding_) return *this;
    LabelMatrix out;
    out.encoding_ = encoding;
    if (encoding == LabelEncoding::zero_one)
        out.values_ = ((values_.array() + 1.0) * 0.5).matrix();
    else
        out.values_ = (values_.array() * 2.0 - 1.0).matrix();
    return out;
}

LabelMatrix LabelMatrix::select_columns(std::span<const Index> columns) const {
    LabelMatrix out;
    out.encoding_ = encoding_;
    out.values_ = sec::select_columns(values_, columns);
    return out;
}

std::vector<int> column_argmax(const Matrix& scores) {
    std::vector<int> ids(static_cast<std::size_t>(scores.cols()));
    for (Index j = 0; j < scores.cols(); ++j) {
        Index best = 0;
        for (Index i = 1; i < scores.rows(); ++i)
            if (scores(i, j) > scores(best, j)) best = i;
        ids[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return ids;
}

LabelMatrix harden_decisions(const DecisionMatrix& decisions) {
    if (decisions.classes() < 1) throw InputError("decision matrix has no classes");
    const auto ids = column_argmax(decisions.values);
    return LabelMatrix::from_class_ids(ids, decisions.classes(), LabelEncoding::zero_one);
}

Matrix select_columns(const Matrix& m, std::span<const Index> columns) {
    Matrix out(m.rows(), static_cast<Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const Index j = columns[k];
        if (j < 0 || j >= m.cols()) throw InputError("column index out of range");
        out.col(static_cast<Index>(k)) = m.col(j);
    }
    return out;
}

}  // namespace sec
