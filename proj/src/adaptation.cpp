#include "sec/adaptation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstring>

namespace sec {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InputError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " does not match " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
}

// H B for H = Theta - Theta e e' Theta / s, without forming H.
Matrix apply_centering(const Vector& theta, double s, const Matrix& B) {
    Matrix out = theta.asDiagonal() * B;
    out -= theta * (theta.transpose() * B) / s;
    return out;
}

}  // namespace

AStageState AStageState::initial(Index classes, Index samples, double reg) {
    AStageState s;
    s.theta = Vector::Ones(samples);
    s.slack = Matrix::Zero(classes, samples);
    s.Z = Matrix::Zero(classes, samples);
    s.H = Matrix::Zero(samples, samples);
    s.xi = Vector::Zero(samples);
    s.reg = reg;
    return s;
}

std::uint64_t content_hash(const Matrix& m) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    const std::int64_t shape[2] = {m.rows(), m.cols()};
    mix(shape, sizeof shape);
    mix(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    return h;
}

Matrix target_offsets(const AStageState& state, const Matrix& F, const Matrix& Y) {
    require_same_shape(F, Y, "target_offsets");
    require_same_shape(state.slack, Y, "target_offsets slack");
    return Y + Y.cwiseProduct(state.slack) - state.lambda1 * F;
}

Vector compute_residual_xi(const AStageState& state, const Matrix& F, const Matrix& Y,
                           const Matrix& fitted) {
    require_same_shape(F, Y, "compute_residual_xi");
    require_same_shape(fitted, Y, "compute_residual_xi fitted");
    require_same_shape(state.slack, Y, "compute_residual_xi slack");
    const Matrix r = state.lambda1 * F + state.lambda2 * fitted - Y - Y.cwiseProduct(state.slack);
    return r.colwise().squaredNorm().transpose();
}

Vector update_theta(const Vector& xi, double theta_max) {
    if (xi.size() > 0 && !(xi.minCoeff() >= 0.0)) throw InputError("update_theta: xi must be nonnegative");
    Vector theta(xi.size());
    for (Index i = 0; i < xi.size(); ++i) {
        const double root = std::sqrt(xi(i));
        theta(i) = root > 1.0 ? 0.0 : (root > 0.0 ? std::min(0.5 / root, theta_max) : theta_max);
    }
    return theta;
}

Matrix centering_operator(const Vector& theta) {
    const double s = theta.sum();
    Matrix H = theta.asDiagonal();
    if (s > 0.0) {
        H -= theta * theta.transpose() / s;
        H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    }
    return H;
}

std::optional<DualUpdate> update_dual_operator_and_bias(const AStageState& state, const Matrix& K,
                                                        const Matrix* kernel_factor) {
    const Index n = state.theta.size();
    const Index c = state.Z.rows();
    if (K.rows() != n || K.cols() != n) throw InputError("update_dual_operator_and_bias: K must be n x n");
    if (state.Z.cols() != n) throw InputError("update_dual_operator_and_bias: Z must be c x n");
    if (!(state.reg > 0.0)) throw InputError("update_dual_operator_and_bias: reg must be positive");

    const double s = state.theta.sum();
    if (!(s > 0.0)) return std::nullopt;

    const double l2 = state.lambda2;
    if (l2 == 0.0) return DualUpdate{Matrix::Zero(c, n), Vector::Zero(c)};

    // T' = (l2^2 H K + reg I)^{-1} l2 H Z'
    DualUpdate out;
    if (kernel_factor) {
        const Matrix& L = *kernel_factor;
        if (L.rows() != n) throw InputError("update_dual_operator_and_bias: factor must have n rows");
        // min_W reg |W|^2 + sum_i theta_i |l2 W'l_i - z_i|^2 on theta-centred
        // rows, by QR of the stacked system. Going through Woodbury instead
        // subtracts two nearly equal terms and divides by reg.
        const Index d = L.cols();
        const RowVector l_mean = state.theta.transpose() * L / s;
        const RowVector z_mean = (state.Z * state.theta).transpose() / s;
        const Vector w = state.theta.cwiseSqrt();
        Matrix A(n + d, d);
        Matrix rhs = Matrix::Zero(n + d, c);
        A.topRows(n) = l2 * (w.asDiagonal() * (L.rowwise() - l_mean));
        A.bottomRows(d) = std::sqrt(state.reg) * Matrix::Identity(d, d);
        rhs.topRows(n) = w.asDiagonal() * (state.Z.transpose().rowwise() - z_mean);
        Matrix W = A.colPivHouseholderQr().solve(rhs);

        // Stationarity gives T' = (l2 / reg) Theta r with r the centred residual.
        const Matrix residual = (state.Z.transpose().rowwise() - z_mean) - l2 * ((L.rowwise() - l_mean) * W);
        out.T = ((l2 / state.reg) * (state.theta.asDiagonal() * residual)).transpose();
        out.b = z_mean.transpose() / l2 - W.transpose() * l_mean.transpose();
        out.W = std::move(W);
        return out;
    }
    const Matrix HZt = apply_centering(state.theta, s, state.Z.transpose());
    const Matrix HK = apply_centering(state.theta, s, K);
    out.T = regularized_solve(l2 * l2 * HK, state.reg, l2 * HZt).transpose();
    out.b = state.Z * state.theta / (l2 * s) - out.T * (K * state.theta) / s;
    return out;
}

Matrix update_slack(const AStageState& state, const Matrix& F, const Matrix& Y,
                    const Matrix& fitted) {
    require_same_shape(F, Y, "update_slack");
    require_same_shape(fitted, Y, "update_slack fitted");
    const Matrix margin = Y.cwiseProduct(state.lambda1 * F + state.lambda2 * fitted);
    return (margin.array() - 1.0).cwiseMax(0.0).matrix();
}

MixingUpdate update_mixing(const Matrix& a, const Matrix& b, const Matrix& c, const Vector& theta,
                           double previous_lambda1, double previous_lambda2) {
    require_same_shape(a, b, "update_mixing");
    require_same_shape(a, c, "update_mixing");
    if (theta.size() != a.cols()) throw InputError("update_mixing: theta length must equal n");

    const RowVector w = theta.transpose();
    const double saa = w.dot(a.colwise().squaredNorm());
    const double sbb = w.dot(b.colwise().squaredNorm());
    const double sab = w.dot(a.cwiseProduct(b).colwise().sum());
    const double sac = w.dot(a.cwiseProduct(c).colwise().sum());
    const double sbc = w.dot(b.cwiseProduct(c).colwise().sum());

    const double det = saa * sbb - sab * sab;
    // Relative test so the rule stays invariant under rescaling theta.
    if (!(saa > 0.0 && sbb > 0.0) || !(std::abs(det) > 1e-12 * saa * sbb))
        return {previous_lambda1, previous_lambda2, true};
    return {(sac * sbb - sbc * sab) / det, (sbc * saa - sac * sab) / det, false};
}

double objective_value(const AStageState& state, const Matrix& F, const Matrix& Y,
                       const Matrix& fitted, double w_norm_sq) {
    const Vector xi = compute_residual_xi(state, F, Y, fitted);
    return state.reg * w_norm_sq + xi.array().sqrt().min(1.0).sum();
}

AdaptationResult adapt_classifier(const DecisionMatrix& F_dec, const LabelMatrix& labels,
                                  std::shared_ptr<const Matrix> X2, const KernelSpec& kernel,
                                  double reg, const AdaptationOptions& options) {
    if (!X2) throw InputError("adapt_classifier: missing view-2 matrix");
    if (labels.encoding() != LabelEncoding::pm1) throw InputError("adapt_classifier expects pm1 labels");
    const Matrix& F = F_dec.values;
    const Matrix& Y = labels.values();
    const Index c = Y.rows();
    const Index n = Y.cols();
    if (n < 2) throw InputError("adapt_classifier: need at least two training samples");
    require_same_shape(F, Y, "adapt_classifier decisions");
    if (X2->cols() != n) throw InputError("adapt_classifier: view-2 sample count differs from labels");
    if (!F.allFinite()) throw InputError("adapt_classifier: non-finite decision values");
    if (!(reg > 0.0 && std::isfinite(reg))) throw InputError("adapt_classifier: reg must be positive");
    if (options.max_iterations < 1) throw InputError("adapt_classifier: max_iterations must be >= 1");

    const Matrix K = gram_matrix(*X2, kernel, "X2_train").values;
    Matrix factor;
    const bool low_rank = kernel.family == KernelFamily::linear && X2->rows() < n;
    if (low_rank) factor = X2->transpose();

    AStageState state = AStageState::initial(c, n, reg);
    if (options.fix_lambda2_zero) state.lambda2 = 0.0;

    AdaptationResult result;
    auto& trace = result.trace;
    Matrix T = Matrix::Zero(c, n);
    Vector b = Vector::Zero(c);
    Matrix fitted = Matrix::Zero(c, n);
    std::optional<Matrix> W;

    for (int it = 0; it < options.max_iterations; ++it) {
        state.Z = target_offsets(state, F, Y);
        state.H = centering_operator(state.theta);
        auto dual = update_dual_operator_and_bias(state, K, low_rank ? &factor : nullptr);
        if (!dual) {
            trace.all_capped = true;
            break;
        }
        T = std::move(dual->T);
        b = std::move(dual->b);
        double w_norm_sq = 0.0;
        W = std::move(dual->W);
        if (W) {
            fitted = W->transpose() * (*X2);
            w_norm_sq = W->squaredNorm();
        } else {
            const Matrix TK = T * K;
            fitted = TK;
            w_norm_sq = TK.cwiseProduct(T).sum();
        }
        fitted.colwise() += b;

        state.slack = update_slack(state, F, Y, fitted);

        const Matrix targets = Y + Y.cwiseProduct(state.slack);
        if (options.fix_lambda2_zero) {
            const double saa = state.theta.dot(F.colwise().squaredNorm().transpose());
            if (saa > 0.0)
                state.lambda1 = state.theta.dot(F.cwiseProduct(targets).colwise().sum().transpose()) / saa;
            else
                trace.mixing_kept_previous = true;
        } else {
            const auto mix = update_mixing(F, fitted, targets, state.theta, state.lambda1, state.lambda2);
            state.lambda1 = mix.lambda1;
            state.lambda2 = mix.lambda2;
            trace.mixing_kept_previous = trace.mixing_kept_previous || mix.kept_previous;
        }

        state.xi = compute_residual_xi(state, F, Y, fitted);
        const double objective = reg * w_norm_sq + state.xi.array().sqrt().min(1.0).sum();
        state.theta = update_theta(state.xi, options.theta_max);

        trace.objective.push_back(objective);
        trace.iterations = it + 1;
        if (options.record_states) trace.states.push_back(state);

        if (trace.objective.size() >= 2) {
            const double previous = trace.objective[trace.objective.size() - 2];
            if (previous - objective < options.tolerance * std::abs(previous)) {
                trace.converged = true;
                break;
            }
        }
        if (!(state.theta.sum() > 0.0)) {
            trace.all_capped = true;
            if (it == 0) {
                T.setZero();
                if (W) W->setZero();
                b.setZero();
                fitted.setZero();
                result.warning = "every training point has capped loss after the first pass; "
                                 "view-2 term disabled";
            }
            break;
        }
    }

    result.model.T = std::move(T);
    result.model.b = std::move(b);
    result.model.W = std::move(W);
    result.model.lambda1 = state.lambda1;
    result.model.lambda2 = state.lambda2;
    result.model.kernel = kernel;
    result.model.view2_hash = content_hash(*X2);
    result.model.view2_train = std::move(X2);
    result.model.baseline_id = F_dec.classifier_id;
    result.training_decisions = state.lambda1 * F + state.lambda2 * fitted;
    return result;
}

AdaptationResult adapt_classifier(const DecisionMatrix& F, const LabelMatrix& Y, const Matrix& X2,
                                  const KernelSpec& kernel, double reg,
                                  const AdaptationOptions& options) {
    return adapt_classifier(F, Y, std::make_shared<const Matrix>(X2), kernel, reg, options);
}

DecisionMatrix predict_adapted(const AdaptedModel& model, const DecisionMatrix& F_test,
                               const GramMatrix<double>& K_tr_te) {
    if (K_tr_te.rows() != model.samples())
        throw InputError("predict_adapted: kernel has " + std::to_string(K_tr_te.rows()) +
                         " rows, model was trained on " + std::to_string(model.samples()));
    if (K_tr_te.cols() != F_test.samples())
        throw InputError("predict_adapted: kernel and decision sample counts differ");
    if (F_test.classes() != model.classes())
        throw InputError("predict_adapted: decision class count differs from model");

    Matrix view2 = model.T * K_tr_te.values;
    view2.colwise() += model.b;
    return {model.lambda1 * F_test.values + model.lambda2 * view2, "adapted:" + model.baseline_id};
}

DecisionMatrix predict_adapted(const AdaptedModel& model, const DecisionMatrix& F_test,
                               const Matrix& X2_test) {
    if (model.W) {
        if (X2_test.rows() != model.W->rows())
            throw InputError("predict_adapted: view-2 test features have " + std::to_string(X2_test.rows()) +
                             " rows, model expects " + std::to_string(model.W->rows()));
        if (X2_test.cols() != F_test.samples())
            throw InputError("predict_adapted: view-2 and decision sample counts differ");
        if (F_test.classes() != model.classes())
            throw InputError("predict_adapted: decision class count differs from model");
        Matrix view2 = model.W->transpose() * X2_test;
        view2.colwise() += model.b;
        return {model.lambda1 * F_test.values + model.lambda2 * view2, "adapted:" + model.baseline_id};
    }
    if (!model.view2_train)
        throw InputError("predict_adapted: model carries no view-2 training matrix");
    return predict_adapted(model, F_test,
                           cross_gram(*model.view2_train, X2_test, model.kernel, "X2_train", "X2_test"));
}

}  // namespace sec
