#include "sec/experiment.hpp"

#include "sec/csv.hpp"
#include "sec/pca.hpp"
#include "sec/serialize.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace sec {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("config key '" + key + "': '" + text + "' is not a number");
    }
}

long parse_integer(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v)) throw InputError("config key '" + key + "': '" + text + "' is not an integer");
    return static_cast<long>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw InputError("config key '" + key + "': '" + text + "' is not a boolean");
}

std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

void standardize(Matrix& train, Matrix& test) {
    const Vector mean = train.rowwise().mean();
    train.colwise() -= mean;
    test.colwise() -= mean;
    const double denom = std::max<double>(static_cast<double>(train.cols() - 1), 1.0);
    Vector scale = (train.rowwise().squaredNorm() / denom).cwiseSqrt();
    for (Index i = 0; i < scale.size(); ++i)
        if (!(scale(i) > 1e-12)) scale(i) = 1.0;
    train = scale.cwiseInverse().asDiagonal() * train;
    test = scale.cwiseInverse().asDiagonal() * test;
}

struct Dataset {
    Matrix X1;
    Matrix X2;  // empty when derived by PCA
    LabelMatrix Y;
    std::vector<Matrix> external;  // per baseline, c x N (empty for trained ones)
};

Dataset load_dataset(const ExperimentConfig& cfg) {
    const CsvOptions csv{cfg.header};
    Dataset d;
    d.Y = load_labels_csv(cfg.labels_path, cfg.classes, csv);
    const Index N = d.Y.samples();
    if (!cfg.view1_path.empty()) {
        d.X1 = load_view_csv(cfg.view1_path, csv);
        if (d.X1.cols() != N)
            throw InputError(cfg.view1_path + ": " + std::to_string(d.X1.cols()) + " samples, labels have " +
                             std::to_string(N));
    }
    if (!cfg.view2_path.empty()) {
        d.X2 = load_view_csv(cfg.view2_path, csv);
        if (d.X2.cols() != N)
            throw InputError(cfg.view2_path + ": " + std::to_string(d.X2.cols()) + " samples, labels have " +
                             std::to_string(N));
    }
    for (const auto& spec : cfg.baselines)
        d.external.push_back(spec.kind == BaselineKind::external
                                 ? load_external_predictions(spec.path, d.Y.classes(), N, csv).values
                                 : Matrix());
    return d;
}

RepetitionRecord run_repetition(const ExperimentConfig& cfg, const Dataset& data, int rep) {
    RepetitionRecord r;
    r.index = rep;
    try {
        const Split split = make_split(data.Y.samples(), cfg.split.train_fraction,
                                       repetition_seed(cfg.split.seed, rep));
        const LabelMatrix Y_tr = data.Y.select_columns(split.train);
        const LabelMatrix Y_te = data.Y.select_columns(split.test).to(LabelEncoding::zero_one);

        Matrix X1_tr, X1_te;
        if (data.X1.size() > 0) {
            X1_tr = select_columns(data.X1, split.train);
            X1_te = select_columns(data.X1, split.test);
            if (cfg.standardize) standardize(X1_tr, X1_te);
        }
        Matrix X2_tr, X2_te;
        if (cfg.view2_pca_dim > 0) {
            const PcaModel pca = fit_pca(X1_tr, cfg.view2_pca_dim);
            X2_tr = pca_transform(pca, X1_tr);
            X2_te = pca_transform(pca, X1_te);
        } else {
            X2_tr = select_columns(data.X2, split.train);
            X2_te = select_columns(data.X2, split.test);
            if (cfg.standardize) standardize(X2_tr, X2_te);
        }

        std::vector<DecisionMatrix> F_tr, F_te;
        std::vector<LabelMatrix> hat_Y;
        for (std::size_t j = 0; j < cfg.baselines.size(); ++j) {
            const auto& spec = cfg.baselines[j];
            if (spec.kind == BaselineKind::external) {
                F_tr.push_back({select_columns(data.external[j], split.train), spec.id()});
                F_te.push_back({select_columns(data.external[j], split.test), spec.id()});
            } else {
                const auto model = fit_baseline(spec, X1_tr, Y_tr);
                F_tr.push_back(decision_values(model, X1_tr));
                F_te.push_back(decision_values(model, X1_te));
            }
            hat_Y.push_back(harden_decisions(F_te.back()));
            r.baseline_accuracy.push_back(accuracy(hat_Y.back(), Y_te));
            r.baseline_f_score.push_back(f_score(hat_Y.back(), Y_te));
        }
        r.best_accuracy = *std::max_element(r.baseline_accuracy.begin(), r.baseline_accuracy.end());
        r.best_f_score = *std::max_element(r.baseline_f_score.begin(), r.baseline_f_score.end());

        auto X2_shared = std::make_shared<const Matrix>(std::move(X2_tr));
        const auto K_tr_te = cross_gram(*X2_shared, X2_te, cfg.kernel, "X2_train", "X2_test");
        std::vector<LabelMatrix> bar_Y;
        for (std::size_t j = 0; j < cfg.baselines.size(); ++j) {
            const double lambda =
                cfg.lambda ? *cfg.lambda
                           : cross_validate_lambda(F_tr[j], Y_tr, *X2_shared, cfg.kernel, cfg.lambda_grid,
                                                   cfg.cv_folds, cfg.adaptation)
                                 .lambda;
            const auto adapted = adapt_classifier(F_tr[j], Y_tr, X2_shared, cfg.kernel, lambda, cfg.adaptation);
            if (adapted.warning) r.warnings.push_back(F_tr[j].classifier_id + ": " + *adapted.warning);
            const auto G = predict_adapted(adapted.model, F_te[j], K_tr_te);
            bar_Y.push_back(harden_decisions(G));
            r.lambdas.push_back(lambda);
            r.adaptation_iterations.push_back(adapted.trace.iterations);
            r.adapted_accuracy.push_back(accuracy(bar_Y.back(), Y_te));
            r.adapted_f_score.push_back(f_score(bar_Y.back(), Y_te));
        }

        const auto solution = integrate(hat_Y, bar_Y, cfg.integration);
        if (solution.warning) r.warnings.push_back("integration: " + *solution.warning);
        r.sec_accuracy = accuracy(solution.Y_hard, Y_te);
        r.sec_f_score = f_score(solution.Y_hard, Y_te);
        r.epsilon = solution.epsilon;
        r.feasible = solution.feasible;
        r.integration_iterations = solution.iterations;
        r.integration_gap = solution.gap;
        r.security = security_report(hat_Y, bar_Y, solution.Y_hard, Y_te);
        r.completed = true;
    } catch (const std::exception& e) {
        r.completed = false;
        r.error = e.what();
    }
    return r;
}

std::string short_decimal(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s(buf);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (labels_path.empty()) throw InputError("config: [data] labels is required");
    if (baselines.size() < 2) throw InputError("config: at least two baselines are required");
    bool trained = false;
    for (const auto& b : baselines) {
        b.validate();
        if (b.kind != BaselineKind::external) trained = true;
        if (b.kind == BaselineKind::external && !fs::exists(b.path))
            throw InputError("config: prediction file '" + b.path + "' does not exist");
    }
    if ((trained || view2_pca_dim > 0) && view1_path.empty())
        throw InputError("config: [data] view1 is required for trained baselines and PCA views");
    if (view2_path.empty() == (view2_pca_dim <= 0))
        throw InputError("config: set exactly one of [data] view2 and view2_pca_dim");
    for (const auto* p : {&view1_path, &view2_path, &labels_path})
        if (!p->empty() && !fs::exists(*p)) throw InputError("config: file '" + *p + "' does not exist");
    kernel.validate();
    if (lambda && !(*lambda > 0.0)) throw InputError("config: lambda must be positive");
    if (lambda_grid.empty()) throw InputError("config: empty lambda grid");
    for (double g : lambda_grid)
        if (!(g > 0.0)) throw InputError("config: lambda grid values must be positive");
    if (cv_folds < 2) throw InputError("config: folds must be >= 2");
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
        throw InputError("config: train_fraction must lie in (0, 1)");
    if (split.repetitions < 1) throw InputError("config: repetitions must be >= 1");
    if (jobs < 1) throw InputError("config: jobs must be >= 1");
}

ExperimentConfig load_config(const std::string& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(path, static_cast<Index>(e.line()), 0, e.message());
    }
    const fs::path base = fs::path(path).parent_path();
    auto get = [&](const std::string& key) { return tree.get_optional<std::string>(pt::ptree::path_type(key, '/')); };

    ExperimentConfig cfg;
    cfg.name = get("data/name").value_or(fs::path(path).stem().string());
    cfg.view1_path = resolve(base, get("data/view1").value_or(""));
    cfg.view2_path = resolve(base, get("data/view2").value_or(""));
    if (auto v = get("data/view2_pca_dim")) cfg.view2_pca_dim = parse_integer("data.view2_pca_dim", *v);
    cfg.labels_path = resolve(base, get("data/labels").value_or(""));
    if (auto v = get("data/classes")) cfg.classes = parse_integer("data.classes", *v);
    if (auto v = get("data/header")) cfg.header = parse_bool("data.header", *v);
    if (auto v = get("data/standardize")) cfg.standardize = parse_bool("data.standardize", *v);

    for (const auto& name : split_list(get("baselines/list").value_or(""))) {
        BaselineSpec spec;
        spec.kind = parse_baseline_kind(name);
        if (spec.kind == BaselineKind::external)
            throw InputError("config: list external prediction files under [baselines] external");
        if (spec.kind == BaselineKind::linear_svm) spec.regularization = 1e-2;
        cfg.baselines.push_back(spec);
    }
    for (auto& spec : cfg.baselines) {
        if (spec.kind == BaselineKind::knn)
            if (auto v = get("baselines/knn_k")) spec.k = static_cast<int>(parse_integer("baselines.knn_k", *v));
        if (spec.kind == BaselineKind::ridge_regression)
            if (auto v = get("baselines/ridge_regularization"))
                spec.regularization = parse_double("baselines.ridge_regularization", *v);
        if (spec.kind == BaselineKind::linear_svm) {
            if (auto v = get("baselines/svm_regularization"))
                spec.regularization = parse_double("baselines.svm_regularization", *v);
            if (auto v = get("baselines/svm_epochs"))
                spec.epochs = static_cast<int>(parse_integer("baselines.svm_epochs", *v));
        }
    }
    for (const auto& file : split_list(get("baselines/external").value_or("")))
        cfg.baselines.push_back(BaselineSpec::external(resolve(base, file)));

    if (auto v = get("adaptation/kernel")) cfg.kernel.family = parse_kernel_family(*v);
    if (auto v = get("adaptation/gamma")) cfg.kernel.gamma = parse_double("adaptation.gamma", *v);
    if (auto v = get("adaptation/lambda"); v && *v != "auto") cfg.lambda = parse_double("adaptation.lambda", *v);
    if (auto v = get("adaptation/grid")) {
        cfg.lambda_grid.clear();
        for (const auto& g : split_list(*v)) cfg.lambda_grid.push_back(parse_double("adaptation.grid", g));
    }
    if (auto v = get("adaptation/folds")) cfg.cv_folds = static_cast<int>(parse_integer("adaptation.folds", *v));
    if (auto v = get("adaptation/max_iterations"))
        cfg.adaptation.max_iterations = static_cast<int>(parse_integer("adaptation.max_iterations", *v));
    if (auto v = get("adaptation/tolerance")) cfg.adaptation.tolerance = parse_double("adaptation.tolerance", *v);

    if (auto v = get("integration/method")) cfg.integration.method = parse_integration_method(*v);
    if (auto v = get("integration/tol")) cfg.integration.tol = parse_double("integration.tol", *v);
    if (auto v = get("integration/max_iters"))
        cfg.integration.max_iters = static_cast<int>(parse_integer("integration.max_iters", *v));

    if (auto v = get("split/train_fraction")) cfg.split.train_fraction = parse_double("split.train_fraction", *v);
    if (auto v = get("split/repetitions"))
        cfg.split.repetitions = static_cast<int>(parse_integer("split.repetitions", *v));
    if (auto v = get("run/jobs")) cfg.jobs = static_cast<int>(parse_integer("run.jobs", *v));
    cfg.output_dir = resolve(base, get("output/dir").value_or(""));
    return cfg;
}

bool ExperimentReport::all_completed() const {
    if (static_cast<int>(repetitions.size()) != planned_repetitions) return false;
    return std::all_of(repetitions.begin(), repetitions.end(), [](const auto& r) { return r.completed; });
}

std::vector<std::string> ExperimentReport::method_names() const {
    std::vector<std::string> names{"Best"};
    for (const auto& id : baseline_ids) names.push_back("Ad" + id);
    names.push_back("SEC");
    return names;
}

std::vector<MethodScores> repetition_scores(const ExperimentReport& report, const RepetitionRecord& rep) {
    const auto names = report.method_names();
    std::vector<MethodScores> out;
    out.push_back({names.front(), rep.best_accuracy, rep.best_f_score});
    for (std::size_t j = 0; j < rep.adapted_accuracy.size(); ++j)
        out.push_back({names[j + 1], rep.adapted_accuracy[j], rep.adapted_f_score[j]});
    out.push_back({names.back(), rep.sec_accuracy, rep.sec_f_score});
    return out;
}

void aggregate(ExperimentReport& report) {
    const auto names = report.method_names();
    std::vector<std::vector<double>> acc(names.size()), fs(names.size());
    report.secure_repetitions = report.certified_repetitions = report.feasible_repetitions = 0;
    for (const auto& rep : report.repetitions) {
        if (!rep.completed) continue;
        const auto scores = repetition_scores(report, rep);
        for (std::size_t m = 0; m < scores.size() && m < names.size(); ++m) {
            acc[m].push_back(scores[m].accuracy);
            fs[m].push_back(scores[m].f_score);
        }
        report.secure_repetitions += rep.security.secure ? 1 : 0;
        report.certified_repetitions += rep.security.certified ? 1 : 0;
        report.feasible_repetitions += rep.feasible ? 1 : 0;
    }

    report.methods.clear();
    for (std::size_t m = 0; m < names.size(); ++m) {
        MethodSummary s;
        s.method = names[m];
        s.accuracy = summarize(acc[m]);
        s.f_score = summarize(fs[m]);
        if (m > 0 && acc[m].size() >= 2) {
            s.accuracy_vs_best = paired_t_test(acc[m], acc[0]);
            s.f_score_vs_best = paired_t_test(fs[m], fs[0]);
        }
        report.methods.push_back(std::move(s));
    }
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const Dataset data = load_dataset(config);

    ExperimentOutcome out;
    auto& report = out.report;
    report.name = config.name;
    report.seed = config.split.seed;
    report.train_fraction = config.split.train_fraction;
    report.planned_repetitions = config.split.repetitions;
    report.samples = data.Y.samples();
    report.classes = data.Y.classes();
    report.view1_dim = data.X1.rows();
    report.view2_dim = config.view2_pca_dim > 0 ? config.view2_pca_dim : data.X2.rows();
    for (const auto& b : config.baselines) report.baseline_ids.push_back(b.id());

    const auto reps = static_cast<std::size_t>(config.split.repetitions);
    report.repetitions.resize(reps);
    out.timings.repetition_seconds.assign(reps, 0.0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
            const auto t0 = std::chrono::steady_clock::now();
            report.repetitions[r] = run_repetition(config, data, static_cast<int>(r));
            out.timings.repetition_seconds[r] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), reps);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    aggregate(report);
    out.timings.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string render_text_report(const ExperimentReport& report) {
    std::ostringstream out;
    const auto completed = std::count_if(report.repetitions.begin(), report.repetitions.end(),
                                         [](const auto& r) { return r.completed; });
    out << report.name << ": " << report.samples << " samples, " << report.classes << " classes, views "
        << report.view1_dim << " + " << report.view2_dim << ", train fraction " << report.train_fraction << ", "
        << completed << "/" << report.planned_repetitions << " repetitions, seed " << report.seed << "\n\n";

    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-16s %-16s\n", "Method", "Accuracy", "F-score");
    out << line;
    for (const auto& m : report.methods) {
        auto cell = [](const Summary& s, const std::optional<TTestResult>& t) {
            std::string text = short_decimal(s.mean) + "±" + short_decimal(s.stddev);
            if (t) text += " " + verdict_mark(t->verdict);
            return text;
        };
        std::snprintf(line, sizeof line, "%-24s %-18s %-18s\n", m.method.c_str(),
                      cell(m.accuracy, m.accuracy_vs_best).c_str(), cell(m.f_score, m.f_score_vs_best).c_str());
        out << line;
    }
    out << "\n• better than Best, ⊙ tie, ○ worse (paired t-test at 0.05)\n\n";

    std::vector<double> best_d, sec_d, counts;
    for (const auto& r : report.repetitions) {
        if (!r.completed) continue;
        best_d.push_back(r.security.distances.best_distance);
        sec_d.push_back(r.security.distances.integrated_distance);
        counts.push_back(static_cast<double>(r.security.max_count));
    }
    out << "Security (mean over completed repetitions)\n";
    std::snprintf(line, sizeof line, "%-22s %-22s %-16s %-8s %-10s %-8s\n", "min_j |Yj - Y*|^2", "|Y - Y*|^2",
                  "max count / m", "secure", "certified", "feasible");
    out << line;
    std::snprintf(line, sizeof line, "%-22.4f %-22.4f %-16s %-8s %-10s %-8s\n", summarize(best_d).mean,
                  summarize(sec_d).mean,
                  (short_decimal(summarize(counts).mean) + " / " + std::to_string(report.baseline_ids.size())).c_str(),
                  (std::to_string(report.secure_repetitions) + "/" + std::to_string(completed)).c_str(),
                  (std::to_string(report.certified_repetitions) + "/" + std::to_string(completed)).c_str(),
                  (std::to_string(report.feasible_repetitions) + "/" + std::to_string(completed)).c_str());
    out << line;

    for (const auto& r : report.repetitions)
        if (!r.completed) out << "repetition " << r.index << " failed: " << r.error << "\n";
    return out.str();
}

void emit_report(const ExperimentReport& report, const ExperimentTimings& timings, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir + ": cannot create directory: " + ec.message());
    const fs::path base(dir);

    write_json_file((base / "report.json").string(), Json(report));
    write_json_file((base / "timings.json").string(), Json(timings));

    const auto txt = (base / "report.txt").string();
    std::ofstream text(txt);
    if (!text) throw std::runtime_error(txt + ": cannot open for writing");
    text << render_text_report(report);

    const auto csv = (base / "scores.csv").string();
    std::ofstream scores(csv);
    if (!scores) throw std::runtime_error(csv + ": cannot open for writing");
    scores << std::setprecision(17) << "repetition,method,accuracy,f_score\n";
    for (const auto& r : report.repetitions) {
        if (!r.completed) continue;
        for (const auto& s : repetition_scores(report, r))
            scores << r.index << ',' << s.method << ',' << s.accuracy << ',' << s.f_score << '\n';
    }
    if (!text || !scores) throw std::runtime_error(dir + ": write failed");
}

}  // namespace sec
