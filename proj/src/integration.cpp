#include "sec/integration.hpp"

#include "sec/numerics.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace sec {

namespace {

void require_labels(const std::vector<LabelMatrix>& list, const char* what, Index& c, Index& t) {
    if (list.empty()) throw InputError(std::string(what) + ": need at least one label matrix");
    for (const auto& Y : list) {
        if (Y.encoding() != LabelEncoding::zero_one)
            throw InputError(std::string(what) + ": label matrices must be zero_one encoded");
        if (c < 0) {
            c = Y.classes();
            t = Y.samples();
        } else if (Y.classes() != c || Y.samples() != t) {
            throw InputError(std::string(what) + ": label matrices differ in shape");
        }
    }
}

struct DualData {
    Matrix G;  // <bar_Y_k, bar_Y_l>
    Vector c;  // |bar_Y_k|^2 - q_k
};

DualData dual_data(const IntegrationProblem& p) {
    const Index m = p.anchors();
    DualData d{Matrix(m, m), Vector(m)};
    for (Index k = 0; k < m; ++k) {
        const Matrix& Yk = p.bar_Y[static_cast<std::size_t>(k)].values();
        for (Index l = 0; l <= k; ++l) {
            d.G(k, l) = Yk.cwiseProduct(p.bar_Y[static_cast<std::size_t>(l)].values()).sum();
            d.G(l, k) = d.G(k, l);
        }
        d.c(k) = Yk.squaredNorm() - p.q(k);
    }
    return d;
}

// Primal value of Y(mu) = sum mu_k bar_Y_k, evaluated in weight space.
double primal_value(const DualData& d, const Vector& mu) {
    const Vector Gmu = d.G * mu;
    return mu.dot(Gmu) + (d.c - 2.0 * Gmu).maxCoeff();
}

double dual_value(const DualData& d, const Vector& mu) {
    return mu.dot(d.c) - mu.dot(d.G * mu);
}

// Solves the KKT system of max mu'c - mu'G mu on the simplex restricted to a
// support, dropping the most negative weight until the solution is nonnegative.
std::optional<Vector> active_set_solve(const DualData& d, std::vector<Index> support) {
    const Index m = d.G.rows();
    while (!support.empty()) {
        const Index s = static_cast<Index>(support.size());
        Matrix A = Matrix::Zero(s + 1, s + 1);
        Vector rhs(s + 1);
        for (Index a = 0; a < s; ++a) {
            for (Index b = 0; b < s; ++b)
                A(a, b) = 2.0 * d.G(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
            A(a, s) = 1.0;
            A(s, a) = 1.0;
            rhs(a) = d.c(support[static_cast<std::size_t>(a)]);
        }
        rhs(s) = 1.0;
        // G may be singular (repeated anchors); the minimum-norm solution still
        // yields the unique primal point.
        const Vector sol = A.completeOrthogonalDecomposition().solve(rhs);
        Index worst = -1;
        double worst_value = -1e-14;
        for (Index a = 0; a < s; ++a)
            if (sol(a) < worst_value) {
                worst_value = sol(a);
                worst = a;
            }
        if (worst < 0) {
            Vector mu = Vector::Zero(m);
            for (Index a = 0; a < s; ++a) mu(support[static_cast<std::size_t>(a)]) = std::max(sol(a), 0.0);
            const double total = mu.sum();
            if (!(total > 0.0)) return std::nullopt;
            return Vector(mu / total);
        }
        support.erase(support.begin() + worst);
    }
    return std::nullopt;
}

std::vector<Index> support_of(const Vector& mu, double threshold) {
    std::vector<Index> s;
    for (Index k = 0; k < mu.size(); ++k)
        if (mu(k) > threshold) s.push_back(k);
    return s;
}

struct Tracker {
    const DualData& d;
    Vector best_mu;
    double best_primal = std::numeric_limits<double>::infinity();
    double best_dual = -std::numeric_limits<double>::infinity();

    void offer(const Vector& mu) {
        const double p = primal_value(d, mu);
        if (p < best_primal) {
            best_primal = p;
            best_mu = mu;
        }
        best_dual = std::max(best_dual, dual_value(d, mu));
    }
    double gap() const { return best_primal - best_dual; }
};

IntegrationSolution solve_dual(const IntegrationProblem& p, const IntegrationOptions& o) {
    const Index m = p.anchors();
    const DualData d = dual_data(p);

    Vector mu = Vector::Constant(m, 1.0 / static_cast<double>(m));
    if (o.initial_weights) {
        if (o.initial_weights->size() != m) throw InputError("initial_weights must have one entry per anchor");
        mu = simplex_projection(*o.initial_weights);
    }

    Tracker tr{d, mu};
    tr.offer(mu);
    auto polish = [&](const Vector& from) {
        std::vector<Index> s = support_of(from, 1e-9);
        if (s.empty()) s = support_of(from, 0.0);
        if (auto refined = active_set_solve(d, std::move(s))) tr.offer(*refined);
    };
    polish(mu);

    int it = 0;
    if (tr.gap() > o.tol) {
        const double L = std::max(2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(d.G, Eigen::EigenvaluesOnly)
                                            .eigenvalues()
                                            .maxCoeff(),
                                  1e-12);
        Vector z = mu;
        double momentum = 1.0;
        for (it = 1; it <= o.max_iters; ++it) {
            const Vector next = simplex_projection(z - (2.0 * d.G * z - d.c) / L);
            const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            z = next + ((momentum - 1.0) / momentum_next) * (next - mu);
            mu = next;
            momentum = momentum_next;
            tr.offer(mu);
            if (it % 20 == 0) polish(mu);
            if (tr.gap() <= o.tol) break;
        }
        if (it > o.max_iters) {
            polish(mu);
            it = o.max_iters;
        }
    }

    IntegrationSolution out;
    out.weights = tr.best_mu;
    out.Y_soft = Matrix::Zero(p.c, p.t);
    for (Index k = 0; k < m; ++k) out.Y_soft += tr.best_mu(k) * p.bar_Y[static_cast<std::size_t>(k)].values();
    out.iterations = it;
    out.gap = std::max(tr.gap(), 0.0);
    out.converged = tr.gap() <= o.tol;
    return out;
}

Matrix project_columns(const Matrix& Y) {
    Matrix out(Y.rows(), Y.cols());
    for (Index j = 0; j < Y.cols(); ++j) out.col(j) = simplex_projection(Y.col(j));
    return out;
}

IntegrationSolution solve_primal_subgradient(const IntegrationProblem& p, const IntegrationOptions& o) {
    const Index m = p.anchors();
    const DualData d = dual_data(p);

    Matrix Y;
    if (o.initial_Y) {
        if (o.initial_Y->rows() != p.c || o.initial_Y->cols() != p.t)
            throw InputError("initial_Y must be c x t");
        Y = project_columns(*o.initial_Y);
    } else {
        Y = Matrix::Zero(p.c, p.t);
        for (const auto& Yk : p.bar_Y) Y += Yk.values();
        Y /= static_cast<double>(m);
    }

    Matrix best_Y = Y;
    double best_phi = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    Vector selections = Vector::Zero(m);
    Vector inner(m);
    int it = 0;
    for (it = 1; it <= o.max_iters; ++it) {
        for (Index k = 0; k < m; ++k) inner(k) = p.bar_Y[static_cast<std::size_t>(k)].values().cwiseProduct(Y).sum();
        Index top = 0;
        const double phi = Y.squaredNorm() + (d.c - 2.0 * inner).maxCoeff(&top);
        if (phi < best_phi) {
            best_phi = phi;
            best_Y = Y;
        }
        selections(top) += 1.0;
        lower = std::max(lower, dual_value(d, selections / selections.sum()));
        if (best_phi - lower <= o.tol) break;

        const Matrix g = 2.0 * (Y - p.bar_Y[static_cast<std::size_t>(top)].values());
        const double gn = g.squaredNorm();
        if (gn == 0.0) {
            lower = best_phi;
            break;
        }
        // Polyak step against the best dual bound, never longer than the
        // 1/(2k) schedule that strong convexity (modulus 2) guarantees.
        const double step = std::min((phi - lower) / gn, 1.0 / (2.0 * it));
        Y = project_columns(Y - step * g);
    }

    IntegrationSolution out;
    out.Y_soft = std::move(best_Y);
    out.weights = selections / std::max(selections.sum(), 1.0);
    out.iterations = std::min(it, o.max_iters);
    out.gap = std::max(best_phi - lower, 0.0);
    out.converged = out.gap <= o.tol;
    return out;
}

}  // namespace

std::string to_string(IntegrationMethod method) {
    return method == IntegrationMethod::dual ? "dual" : "primal_subgradient";
}

IntegrationMethod parse_integration_method(const std::string& name) {
    if (name == "dual") return IntegrationMethod::dual;
    if (name == "primal_subgradient" || name == "subgradient") return IntegrationMethod::primal_subgradient;
    throw InputError("unknown integration method '" + name + "'");
}

Vector compute_surrogate_radii(const std::vector<LabelMatrix>& hat_Y,
                               const std::vector<LabelMatrix>& bar_Y) {
    Index c = -1;
    Index t = 0;
    require_labels(hat_Y, "hat_Y", c, t);
    require_labels(bar_Y, "bar_Y", c, t);
    Vector q(static_cast<Index>(bar_Y.size()));
    for (std::size_t k = 0; k < bar_Y.size(); ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& Yj : hat_Y) best = std::min(best, (Yj.values() - bar_Y[k].values()).squaredNorm());
        q(static_cast<Index>(k)) = best;
    }
    return q;
}

IntegrationProblem IntegrationProblem::build(std::vector<LabelMatrix> hat_Y, std::vector<LabelMatrix> bar_Y) {
    IntegrationProblem p;
    p.q = compute_surrogate_radii(hat_Y, bar_Y);
    p.c = bar_Y.front().classes();
    p.t = bar_Y.front().samples();
    p.hat_Y = std::move(hat_Y);
    p.bar_Y = std::move(bar_Y);
    return p;
}

Vector vectorize_labels(const Matrix& Y) { return Y.reshaped(); }

Matrix reshape_labels(const Vector& v, Index c, Index t) {
    if (v.size() != c * t) throw InputError("reshape_labels: length is not c * t");
    return v.reshaped(c, t);
}

double secure_objective(const IntegrationProblem& problem, const Matrix& Y) {
    if (Y.rows() != problem.c || Y.cols() != problem.t) throw InputError("secure_objective: Y must be c x t");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < problem.bar_Y.size(); ++k)
        worst = std::max(worst, (Y - problem.bar_Y[k].values()).squaredNorm() - problem.q(static_cast<Index>(k)));
    return worst;
}

IntegrationSolution solve_secure_program(const IntegrationProblem& problem,
                                         const IntegrationOptions& options) {
    if (problem.anchors() < 1 || problem.t < 1) throw InputError("solve_secure_program: empty problem");
    if (problem.q.size() != problem.anchors()) throw InputError("solve_secure_program: q has the wrong length");
    if (!(options.tol > 0.0)) throw InputError("solve_secure_program: tol must be positive");
    if (options.max_iters < 1) throw InputError("solve_secure_program: max_iters must be >= 1");

    IntegrationSolution out = options.method == IntegrationMethod::dual
                                  ? solve_dual(problem, options)
                                  : solve_primal_subgradient(problem, options);
    out.epsilon = -secure_objective(problem, out.Y_soft);
    out.feasible = out.epsilon >= -kFeasibilityTolerance;
    out.Y_hard = harden_soft_labels(out.Y_soft);
    if (!out.converged)
        out.warning = "integration solver stopped after " + std::to_string(out.iterations) +
                      " iterations with gap " + std::to_string(out.gap);
    return out;
}

LabelMatrix harden_soft_labels(const Matrix& Y_soft) {
    if (Y_soft.rows() < 1) throw InputError("harden_soft_labels: no classes");
    if (!Y_soft.allFinite()) throw InputError("harden_soft_labels: non-finite entries");
    std::vector<int> ids(static_cast<std::size_t>(Y_soft.cols()));
    for (Index j = 0; j < Y_soft.cols(); ++j) {
        const double top = Y_soft.col(j).maxCoeff();
        Index k = 0;
        while (Y_soft(k, j) < top - 1e-9) ++k;
        ids[static_cast<std::size_t>(j)] = static_cast<int>(k);
    }
    return LabelMatrix::from_class_ids(ids, Y_soft.rows(), LabelEncoding::zero_one);
}

IntegrationSolution integrate(std::vector<LabelMatrix> hat_Y, std::vector<LabelMatrix> bar_Y,
                              const IntegrationOptions& options) {
    return solve_secure_program(IntegrationProblem::build(std::move(hat_Y), std::move(bar_Y)), options);
}

}  // namespace sec
