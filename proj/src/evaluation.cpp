#include "sec/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sec {

namespace {

const Matrix& zero_one_values(const LabelMatrix& Y, LabelMatrix& storage) {
    if (Y.encoding() == LabelEncoding::zero_one) return Y.values();
    storage = Y.to(LabelEncoding::zero_one);
    return storage.values();
}

void require_same_shape(const LabelMatrix& a, const LabelMatrix& b, const char* what) {
    if (a.classes() != b.classes() || a.samples() != b.samples())
        throw InputError(std::string(what) + ": label matrices differ in shape");
    if (a.samples() < 1) throw InputError(std::string(what) + ": no samples");
}

}  // namespace

double accuracy(const LabelMatrix& Y_pred, const LabelMatrix& Y_star) {
    require_same_shape(Y_pred, Y_star, "accuracy");
    LabelMatrix sa, sb;
    const Matrix& a = zero_one_values(Y_pred, sa);
    const Matrix& b = zero_one_values(Y_star, sb);
    return accuracy_from_distance((a - b).squaredNorm(), a.cols());
}

double accuracy_from_distance(double distance, Index t) {
    if (t < 1) throw InputError("accuracy_from_distance: t must be positive");
    // (2t - d) is an exact integer for 0/1 inputs, so this rounds once and
    // agrees bit for bit with matches / t.
    const double two_t = 2.0 * static_cast<double>(t);
    return (two_t - distance) / two_t;
}

double f_score(const LabelMatrix& Y_pred, const LabelMatrix& Y_star) {
    require_same_shape(Y_pred, Y_star, "f_score");
    const auto pred = Y_pred.class_ids();
    const auto truth = Y_star.class_ids();
    const Index c = Y_star.classes();

    auto f1_of = [&](int k) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (pred[i] == k && truth[i] == k) ++tp;
            else if (pred[i] == k) ++fp;
            else if (truth[i] == k) ++fn;
        }
        return tp > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    };

    if (c == 2) return f1_of(0);
    double total = 0.0;
    for (Index k = 0; k < c; ++k) total += f1_of(static_cast<int>(k));
    return total / static_cast<double>(c);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::win: return "win";
        case Verdict::tie: return "tie";
        case Verdict::loss: return "loss";
    }
    return "tie";
}

Verdict parse_verdict(const std::string& name) {
    if (name == "win") return Verdict::win;
    if (name == "tie") return Verdict::tie;
    if (name == "loss") return Verdict::loss;
    throw InputError("unknown verdict '" + name + "'");
}

std::string verdict_mark(Verdict v) {
    switch (v) {
        case Verdict::win: return "•";
        case Verdict::tie: return "⊙";
        case Verdict::loss: return "○";
    }
    return "?";
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() != b.size()) throw InputError("paired_t_test: score vectors differ in length");
    if (a.size() < 2) throw InputError("paired_t_test: need at least two pairs");

    const auto n = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const Summary s = summarize(diff);

    TTestResult r;
    r.df = n - 1.0;
    // Differences that agree to rounding count as exactly constant.
    const double scale = std::max(std::abs(s.mean), 1.0);
    if (s.stddev <= 1e-14 * scale) {
        if (s.mean == 0.0 || std::abs(s.mean) <= 1e-15 * scale) {
            r.t = 0.0;
            r.p = 1.0;
            r.verdict = Verdict::tie;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), s.mean);
            r.p = 0.0;
            r.verdict = s.mean > 0 ? Verdict::win : Verdict::loss;
        }
        return r;
    }

    r.t = s.mean / (s.stddev / std::sqrt(n));
    const boost::math::students_t dist(r.df);
    r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
    if (r.p < alpha) r.verdict = r.t > 0 ? Verdict::win : Verdict::loss;
    return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t repetition_seed(std::uint64_t master, int repetition) {
    return master ^ splitmix64(static_cast<std::uint64_t>(repetition));
}

std::vector<Index> random_permutation(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
        const auto bound = static_cast<std::uint64_t>(i) + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw;
        do draw = rng();
        while (draw >= limit);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(draw % bound)]);
    }
    return perm;
}

Split make_split(Index n_total, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InputError("make_split: train fraction must lie in (0, 1)");
    const auto n_train = static_cast<Index>(std::floor(train_fraction * static_cast<double>(n_total)));
    if (n_train < 2 || n_total - n_train < 2)
        throw InputError("make_split: need at least two training and two test points");
    const auto perm = random_permutation(n_total, seed);
    Split s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.test.assign(perm.begin() + n_train, perm.end());
    return s;
}

std::vector<Split> make_splits(Index n_total, const SplitPlan& plan) {
    if (plan.repetitions < 1) throw InputError("make_splits: repetitions must be >= 1");
    std::vector<Split> out;
    out.reserve(static_cast<std::size_t>(plan.repetitions));
    for (int r = 0; r < plan.repetitions; ++r)
        out.push_back(make_split(n_total, plan.train_fraction, repetition_seed(plan.seed, r)));
    return out;
}

std::vector<std::vector<Index>> make_folds(Index n, int folds) {
    if (folds < 2 || n < folds) throw InputError("make_folds: need 2 <= folds <= n");
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
    const Index base = n / folds;
    const Index extra = n % folds;
    Index start = 0;
    for (int f = 0; f < folds; ++f) {
        const Index size = base + (f < extra ? 1 : 0);
        for (Index i = 0; i < size; ++i) out[static_cast<std::size_t>(f)].push_back(start + i);
        start += size;
    }
    return out;
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

CrossValidationResult cross_validate_lambda(const DecisionMatrix& F, const LabelMatrix& Y,
                                            const Matrix& X2, const KernelSpec& kernel,
                                            const std::vector<double>& grid, int folds,
                                            const AdaptationOptions& options) {
    if (grid.empty()) throw InputError("cross_validate_lambda: empty grid");
    const Index n = Y.samples();
    if (n < 10) throw InputError("cross_validate_lambda: need at least 10 training samples");
    if (F.samples() != n || X2.cols() != n)
        throw InputError("cross_validate_lambda: decision, label and view-2 sample counts differ");

    CrossValidationResult out;
    out.grid = grid;
    if (grid.size() == 1) {
        out.lambda = grid.front();
        out.mean_accuracy.assign(1, std::numeric_limits<double>::quiet_NaN());
        return out;
    }

    const auto blocks = make_folds(n, folds);
    std::vector<double> totals(grid.size(), 0.0);
    std::vector<int> counted(grid.size(), 0);
    for (const auto& held : blocks) {
        std::vector<Index> fit;
        fit.reserve(static_cast<std::size_t>(n) - held.size());
        for (Index i = 0, h = 0; i < n; ++i) {
            if (h < static_cast<Index>(held.size()) && held[static_cast<std::size_t>(h)] == i)
                ++h;
            else
                fit.push_back(i);
        }
        const DecisionMatrix F_fit{select_columns(F.values, fit), F.classifier_id};
        const DecisionMatrix F_held{select_columns(F.values, held), F.classifier_id};
        const LabelMatrix Y_fit = Y.select_columns(fit);
        const LabelMatrix Y_held = Y.select_columns(held);
        auto X_fit = std::make_shared<const Matrix>(select_columns(X2, fit));
        const Matrix X_held = select_columns(X2, held);
        const auto K_fit_held = cross_gram(*X_fit, X_held, kernel);

        for (std::size_t g = 0; g < grid.size(); ++g) {
            try {
                const auto adapted = adapt_classifier(F_fit, Y_fit, X_fit, kernel, grid[g], options);
                const auto pred = predict_adapted(adapted.model, F_held, K_fit_held);
                totals[g] += accuracy(harden_decisions(pred), Y_held);
                ++counted[g];
            } catch (const SolverError&) {
                // An ill-conditioned grid point simply drops out of the race.
            }
        }
    }

    out.mean_accuracy.resize(grid.size());
    double best = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out.mean_accuracy[g] = counted[g] == static_cast<int>(blocks.size())
                                   ? totals[g] / static_cast<double>(counted[g])
                                   : std::numeric_limits<double>::quiet_NaN();
        const double value = out.mean_accuracy[g];
        const bool smaller = out.lambda == 0.0 || grid[g] < out.lambda;
        if (!std::isnan(value) && (value > best || (value == best && smaller))) {
            best = value;
            out.lambda = grid[g];
        }
    }
    if (best < 0.0) throw TrainingError("cross_validate_lambda: every grid value failed");
    return out;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace sec
