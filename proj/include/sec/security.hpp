#pragma once

#include "sec/labels.hpp"

#include <vector>

namespace sec {

/// Number of baselines j with tr((hat_Y_j - Y)'(Y* - bar_Y_k)) <= 0.
Index check_condition(const std::vector<LabelMatrix>& hat_Y, const LabelMatrix& Y,
                      const LabelMatrix& Y_star, const LabelMatrix& bar_Y_k);

struct SecurityDistances {
    double best_distance = 0.0;        // min_j |hat_Y_j - Y*|^2
    double integrated_distance = 0.0;  // |Y - Y*|^2
    double best_accuracy = 0.0;
    double integrated_accuracy = 0.0;

    friend bool operator==(const SecurityDistances&, const SecurityDistances&) = default;
};

SecurityDistances security_distances(const std::vector<LabelMatrix>& hat_Y, const LabelMatrix& Y,
                                     const LabelMatrix& Y_star);

struct SecurityReport {
    std::vector<Index> condition_counts;  // one per anchor bar_Y_k
    Index max_count = 0;
    Index baselines = 0;
    SecurityDistances distances;
    bool secure = false;     // integrated distance <= best distance
    bool certified = false;  // some anchor satisfies the condition for every j

    friend bool operator==(const SecurityReport&, const SecurityReport&) = default;
};

SecurityReport security_report(const std::vector<LabelMatrix>& hat_Y,
                               const std::vector<LabelMatrix>& bar_Y, const LabelMatrix& Y,
                               const LabelMatrix& Y_star);

}  // namespace sec
