#include "sec/security.hpp"

#include "sec/evaluation.hpp"

#include <algorithm>
#include <limits>

namespace sec {

namespace {

void require_zero_one(const LabelMatrix& Y, const LabelMatrix& ref, const char* what) {
    if (Y.encoding() != LabelEncoding::zero_one)
        throw InputError(std::string(what) + ": expected zero_one label matrices");
    if (Y.classes() != ref.classes() || Y.samples() != ref.samples())
        throw InputError(std::string(what) + ": label matrices differ in shape");
}

}  // namespace

Index check_condition(const std::vector<LabelMatrix>& hat_Y, const LabelMatrix& Y,
                      const LabelMatrix& Y_star, const LabelMatrix& bar_Y_k) {
    require_zero_one(Y, Y_star, "check_condition");
    require_zero_one(Y_star, Y_star, "check_condition");
    require_zero_one(bar_Y_k, Y_star, "check_condition");
    const Matrix anchor_gap = Y_star.values() - bar_Y_k.values();
    Index count = 0;
    for (const auto& Yj : hat_Y) {
        require_zero_one(Yj, Y_star, "check_condition");
        // Integer-valued, so the comparison is exact.
        if ((Yj.values() - Y.values()).cwiseProduct(anchor_gap).sum() <= 0.0) ++count;
    }
    return count;
}

SecurityDistances security_distances(const std::vector<LabelMatrix>& hat_Y, const LabelMatrix& Y,
                                     const LabelMatrix& Y_star) {
    require_zero_one(Y, Y_star, "security_distances");
    require_zero_one(Y_star, Y_star, "security_distances");
    if (hat_Y.empty()) throw InputError("security_distances: need at least one baseline");

    SecurityDistances d;
    d.best_distance = std::numeric_limits<double>::infinity();
    for (const auto& Yj : hat_Y) {
        require_zero_one(Yj, Y_star, "security_distances");
        d.best_distance = std::min(d.best_distance, (Yj.values() - Y_star.values()).squaredNorm());
    }
    d.integrated_distance = (Y.values() - Y_star.values()).squaredNorm();
    d.best_accuracy = accuracy_from_distance(d.best_distance, Y_star.samples());
    d.integrated_accuracy = accuracy_from_distance(d.integrated_distance, Y_star.samples());
    return d;
}

SecurityReport security_report(const std::vector<LabelMatrix>& hat_Y,
                               const std::vector<LabelMatrix>& bar_Y, const LabelMatrix& Y,
                               const LabelMatrix& Y_star) {
    SecurityReport r;
    r.baselines = static_cast<Index>(hat_Y.size());
    r.distances = security_distances(hat_Y, Y, Y_star);
    for (const auto& anchor : bar_Y) {
        r.condition_counts.push_back(check_condition(hat_Y, Y, Y_star, anchor));
        r.max_count = std::max(r.max_count, r.condition_counts.back());
    }
    r.secure = r.distances.integrated_distance <= r.distances.best_distance;
    r.certified = !bar_Y.empty() && r.max_count == r.baselines;
    return r;
}

}  // namespace sec
