#include "sec/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sec {

Json matrix_to_json(const Matrix& m) {
    Json data = Json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
        throw InputError("matrix JSON: data length does not match rows * cols");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) m(i, k) = data.at(static_cast<std::size_t>(i * cols + k)).get<double>();
    return m;
}

std::string hash_to_string(std::uint64_t hash) {
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

std::uint64_t hash_from_string(const std::string& text) {
    const std::string prefix = "fnv1a64:";
    if (text.rfind(prefix, 0) != 0 || text.size() != prefix.size() + 16)
        throw InputError("malformed content hash '" + text + "'");
    return std::stoull(text.substr(prefix.size()), nullptr, 16);
}

void to_json(Json& j, const KernelSpec& k) {
    j = {{"family", to_string(k.family)}};
    if (k.family == KernelFamily::rbf) j["gamma"] = k.gamma;
}

void from_json(const Json& j, KernelSpec& k) {
    k.family = parse_kernel_family(j.at("family").get<std::string>());
    k.gamma = k.family == KernelFamily::rbf ? j.at("gamma").get<double>() : 0.0;
    k.validate();
}

void to_json(Json& j, const AdaptedModel& m) {
    j = {{"kernel", m.kernel},
         {"lambda1", m.lambda1},
         {"lambda2", m.lambda2},
         {"b", std::vector<double>(m.b.begin(), m.b.end())},
         {"T", matrix_to_json(m.T)},
         {"baseline_id", m.baseline_id},
         {"view2_hash", hash_to_string(m.view2_hash)}};
    if (m.W) j["W"] = matrix_to_json(*m.W);
}

void from_json(const Json& j, AdaptedModel& m) {
    m.kernel = j.at("kernel").get<KernelSpec>();
    m.lambda1 = j.at("lambda1").get<double>();
    m.lambda2 = j.at("lambda2").get<double>();
    const auto b = j.at("b").get<std::vector<double>>();
    m.b = Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size()));
    m.T = matrix_from_json(j.at("T"));
    if (m.T.rows() != m.b.size()) throw InputError("adapted model JSON: T and b disagree on class count");
    if (!m.T.allFinite() || !m.b.allFinite()) throw InputError("adapted model JSON: non-finite entries");
    m.baseline_id = j.at("baseline_id").get<std::string>();
    m.view2_hash = hash_from_string(j.at("view2_hash").get<std::string>());
    m.view2_train.reset();
    m.W.reset();
    if (j.contains("W")) {
        m.W = matrix_from_json(j.at("W"));
        if (m.W->cols() != m.b.size() || !m.W->allFinite())
            throw InputError("adapted model JSON: W must be finite with one column per class");
    }
}

void attach_view2(AdaptedModel& model, std::shared_ptr<const Matrix> X2) {
    if (!X2) throw InputError("attach_view2: missing matrix");
    if (content_hash(*X2) != model.view2_hash)
        throw InputError("view-2 training matrix does not match the model (hash " +
                         hash_to_string(content_hash(*X2)) + ", expected " +
                         hash_to_string(model.view2_hash) + ")");
    model.view2_train = std::move(X2);
}

void to_json(Json& j, const IntegrationSolution& s) {
    j = {{"epsilon", s.epsilon},
         {"feasible", s.feasible},
         {"iterations", s.iterations},
         {"gap", s.gap},
         {"converged", s.converged},
         {"weights", std::vector<double>(s.weights.begin(), s.weights.end())},
         {"Y_soft", matrix_to_json(s.Y_soft)},
         {"labels", s.Y_hard.class_ids()}};
    j["warning"] = s.warning ? Json(*s.warning) : Json(nullptr);
}

void to_json(Json& j, const SecurityDistances& d) {
    j = {{"best_distance", d.best_distance},
         {"integrated_distance", d.integrated_distance},
         {"best_accuracy", d.best_accuracy},
         {"integrated_accuracy", d.integrated_accuracy}};
}

void from_json(const Json& j, SecurityDistances& d) {
    j.at("best_distance").get_to(d.best_distance);
    j.at("integrated_distance").get_to(d.integrated_distance);
    j.at("best_accuracy").get_to(d.best_accuracy);
    j.at("integrated_accuracy").get_to(d.integrated_accuracy);
}

void to_json(Json& j, const SecurityReport& r) {
    j = {{"condition_counts", r.condition_counts},
         {"max_count", r.max_count},
         {"baselines", r.baselines},
         {"distances", r.distances},
         {"secure", r.secure},
         {"certified", r.certified}};
}

void from_json(const Json& j, SecurityReport& r) {
    j.at("condition_counts").get_to(r.condition_counts);
    j.at("max_count").get_to(r.max_count);
    j.at("baselines").get_to(r.baselines);
    j.at("distances").get_to(r.distances);
    j.at("secure").get_to(r.secure);
    j.at("certified").get_to(r.certified);
}

void to_json(Json& j, const TTestResult& t) {
    // JSON has no infinity; a degenerate test stores t as null.
    j = {{"t", std::isfinite(t.t) ? Json(t.t) : Json(nullptr)},
         {"df", t.df},
         {"p", t.p},
         {"verdict", to_string(t.verdict)}};
}

void from_json(const Json& j, TTestResult& t) {
    j.at("df").get_to(t.df);
    j.at("p").get_to(t.p);
    t.verdict = parse_verdict(j.at("verdict").get<std::string>());
    const auto& tv = j.at("t");
    if (tv.is_null())
        t.t = t.verdict == Verdict::loss ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
    else
        t.t = tv.get<double>();
}

void to_json(Json& j, const Summary& s) { j = {{"mean", s.mean}, {"std", s.stddev}}; }

void from_json(const Json& j, Summary& s) {
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.stddev);
}

void to_json(Json& j, const MethodSummary& m) {
    j = {{"method", m.method}, {"accuracy", m.accuracy}, {"f_score", m.f_score}};
    j["accuracy_vs_best"] = m.accuracy_vs_best ? Json(*m.accuracy_vs_best) : Json(nullptr);
    j["f_score_vs_best"] = m.f_score_vs_best ? Json(*m.f_score_vs_best) : Json(nullptr);
}

void from_json(const Json& j, MethodSummary& m) {
    j.at("method").get_to(m.method);
    j.at("accuracy").get_to(m.accuracy);
    j.at("f_score").get_to(m.f_score);
    const auto& a = j.at("accuracy_vs_best");
    m.accuracy_vs_best = a.is_null() ? std::nullopt : std::optional<TTestResult>(a.get<TTestResult>());
    const auto& f = j.at("f_score_vs_best");
    m.f_score_vs_best = f.is_null() ? std::nullopt : std::optional<TTestResult>(f.get<TTestResult>());
}

void to_json(Json& j, const RepetitionRecord& r) {
    j = {{"index", r.index},
         {"completed", r.completed},
         {"error", r.error},
         {"warnings", r.warnings},
         {"baseline_accuracy", r.baseline_accuracy},
         {"baseline_f_score", r.baseline_f_score},
         {"adapted_accuracy", r.adapted_accuracy},
         {"adapted_f_score", r.adapted_f_score},
         {"lambdas", r.lambdas},
         {"adaptation_iterations", r.adaptation_iterations},
         {"best_accuracy", r.best_accuracy},
         {"best_f_score", r.best_f_score},
         {"sec_accuracy", r.sec_accuracy},
         {"sec_f_score", r.sec_f_score},
         {"epsilon", r.epsilon},
         {"feasible", r.feasible},
         {"integration_iterations", r.integration_iterations},
         {"integration_gap", r.integration_gap},
         {"security", r.security}};
}

void from_json(const Json& j, RepetitionRecord& r) {
    j.at("index").get_to(r.index);
    j.at("completed").get_to(r.completed);
    j.at("error").get_to(r.error);
    j.at("warnings").get_to(r.warnings);
    j.at("baseline_accuracy").get_to(r.baseline_accuracy);
    j.at("baseline_f_score").get_to(r.baseline_f_score);
    j.at("adapted_accuracy").get_to(r.adapted_accuracy);
    j.at("adapted_f_score").get_to(r.adapted_f_score);
    j.at("lambdas").get_to(r.lambdas);
    j.at("adaptation_iterations").get_to(r.adaptation_iterations);
    j.at("best_accuracy").get_to(r.best_accuracy);
    j.at("best_f_score").get_to(r.best_f_score);
    j.at("sec_accuracy").get_to(r.sec_accuracy);
    j.at("sec_f_score").get_to(r.sec_f_score);
    j.at("epsilon").get_to(r.epsilon);
    j.at("feasible").get_to(r.feasible);
    j.at("integration_iterations").get_to(r.integration_iterations);
    j.at("integration_gap").get_to(r.integration_gap);
    j.at("security").get_to(r.security);
}

void to_json(Json& j, const ExperimentReport& r) {
    j = {{"schema_version", r.schema_version},
         {"name", r.name},
         {"seed", r.seed},
         {"train_fraction", r.train_fraction},
         {"planned_repetitions", r.planned_repetitions},
         {"samples", r.samples},
         {"classes", r.classes},
         {"view1_dim", r.view1_dim},
         {"view2_dim", r.view2_dim},
         {"baseline_ids", r.baseline_ids},
         {"methods", r.methods},
         {"secure_repetitions", r.secure_repetitions},
         {"certified_repetitions", r.certified_repetitions},
         {"feasible_repetitions", r.feasible_repetitions},
         {"repetitions", r.repetitions}};
}

void from_json(const Json& j, ExperimentReport& r) {
    j.at("schema_version").get_to(r.schema_version);
    if (r.schema_version != ExperimentReport::kSchemaVersion)
        throw InputError("unsupported report schema_version " + std::to_string(r.schema_version));
    j.at("name").get_to(r.name);
    j.at("seed").get_to(r.seed);
    j.at("train_fraction").get_to(r.train_fraction);
    j.at("planned_repetitions").get_to(r.planned_repetitions);
    j.at("samples").get_to(r.samples);
    j.at("classes").get_to(r.classes);
    j.at("view1_dim").get_to(r.view1_dim);
    j.at("view2_dim").get_to(r.view2_dim);
    j.at("baseline_ids").get_to(r.baseline_ids);
    j.at("methods").get_to(r.methods);
    j.at("secure_repetitions").get_to(r.secure_repetitions);
    j.at("certified_repetitions").get_to(r.certified_repetitions);
    j.at("feasible_repetitions").get_to(r.feasible_repetitions);
    j.at("repetitions").get_to(r.repetitions);
}

void to_json(Json& j, const ExperimentTimings& t) {
    j = {{"total_seconds", t.total_seconds}, {"repetition_seconds", t.repetition_seconds}};
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error(path + ": write failed");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, 0, "cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path, 0, 0, e.what());
    }
}

}  // namespace sec
