#include "sec/csv.hpp"
#include "sec/experiment.hpp"
#include "sec/serialize.hpp"

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"

#include <doctest.h>

#include <filesystem>

using namespace sec;
using sec::testing::TempDir;

namespace {

// Two informative views of a 3-class problem written as CSV files.
struct SyntheticData {
    TempDir dir;
    Index n = 60;

    SyntheticData() {
        std::mt19937_64 rng(91);
        const auto ids = sec::testing::covering_ids(n, 3, rng);
        const Matrix mu1 = sec::testing::random_matrix(4, 3, rng, 2.0);
        const Matrix mu2 = sec::testing::random_matrix(3, 3, rng, 2.0);
        Matrix X1 = sec::testing::random_matrix(4, n, rng), X2 = sec::testing::random_matrix(3, n, rng);
        Matrix labels(n, 1), ext(n, 3);
        for (Index i = 0; i < n; ++i) {
            const int k = ids[static_cast<std::size_t>(i)];
            X1.col(i) += mu1.col(k);
            X2.col(i) += mu2.col(k);
            labels(i, 0) = k;
            for (Index r = 0; r < 3; ++r) ext(i, r) = (r == k ? 0.6 : -0.6) + 0.8 * std::sin(7.0 * i + r);
        }
        write_csv_matrix(dir.file("x1.csv"), X1.transpose());
        write_csv_matrix(dir.file("x2.csv"), X2.transpose());
        write_csv_matrix(dir.file("y.csv"), labels);
        write_csv_matrix(dir.file("ext.csv"), ext);
    }

    std::string config(const std::string& extra_baselines = "", int repetitions = 1, int jobs = 1,
                       const std::string& view2 = "view2 = x2.csv") const {
        return dir.write("exp.ini", "[data]\nname = synthetic\nview1 = x1.csv\n" + view2 +
                                        "\nlabels = y.csv\nclasses = 3\n"
                                        "[baselines]\nlist = ridge, knn\n" + extra_baselines +
                                        "\n[adaptation]\nkernel = linear\nlambda = 1\n"
                                        "[split]\ntrain_fraction = 0.5\nrepetitions = " +
                                        std::to_string(repetitions) + "\n[run]\njobs = " + std::to_string(jobs) +
                                        "\n[output]\ndir = out\n");
    }
};

}  // namespace

TEST_CASE("load_config resolves paths and reads every section") {
    SyntheticData data;
    const auto cfg = load_config(data.config("knn_k = 3\nexternal = ext.csv", 4, 2));
    CHECK(cfg.name == "synthetic");
    CHECK(std::filesystem::path(cfg.view1_path).is_absolute() == std::filesystem::path(data.dir.path()).is_absolute());
    CHECK(std::filesystem::equivalent(cfg.view1_path, data.dir.file("x1.csv")));
    REQUIRE(cfg.baselines.size() == 3);
    CHECK(cfg.baselines[1].k == 3);
    CHECK(cfg.baselines[2].kind == BaselineKind::external);
    CHECK(cfg.lambda == 1.0);
    CHECK(cfg.split.repetitions == 4);
    CHECK(cfg.jobs == 2);
    CHECK(cfg.classes == Index{3});
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("load_config rejects malformed values") {
    TempDir dir;
    CHECK_THROWS(load_config(dir.write("a.ini", "[split]\nrepetitions = many\n")));
    CHECK_THROWS(load_config(dir.write("b.ini", "[adaptation]\nkernel = poly\n")));
    CHECK_THROWS(load_config(dir.write("c.ini", "[baselines]\nlist = boosting\n")));
    CHECK_THROWS_AS(load_config(dir.write("d.ini", "[data\nview1 = x\n")), ParseError);
    const auto cfg = load_config(dir.write("e.ini", "[data]\nview1 = missing.csv\nlabels = y.csv\n[baselines]\nlist = ridge, knn\n"));
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("config validation needs two baselines and one view-2 source") {
    SyntheticData data;
    auto cfg = load_config(data.config());
    cfg.baselines.pop_back();
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = load_config(data.config("", 1, 1, "view2_pca_dim = 2"));
    CHECK_NOTHROW(cfg.validate());
    cfg.view2_path = data.dir.file("x2.csv");
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("run_experiment: one repetition, two baselines gives Best, two adapted, SEC") {
    SyntheticData data;
    const auto out = run_experiment(load_config(data.config()));
    const auto& r = out.report;
    CHECK(r.all_completed());
    CHECK(r.method_names() == std::vector<std::string>{"Best", "Adridge", "Adknn", "SEC"});
    REQUIRE(r.methods.size() == 4);
    REQUIRE(r.repetitions.size() == 1);
    const auto& rep = r.repetitions[0];
    CHECK(rep.completed);
    CHECK(rep.error.empty());
    CHECK(rep.baseline_accuracy.size() == 2);
    CHECK(rep.adapted_accuracy.size() == 2);
    CHECK(rep.best_accuracy == *std::max_element(rep.baseline_accuracy.begin(), rep.baseline_accuracy.end()));
    CHECK(rep.sec_accuracy == rep.security.distances.integrated_accuracy);
    CHECK(rep.best_accuracy == rep.security.distances.best_accuracy);
    CHECK(r.samples == data.n);
    CHECK(r.view1_dim == 4);
    CHECK(r.view2_dim == 3);
    // Fewer than two repetitions: no t-tests.
    for (const auto& m : r.methods) CHECK_FALSE(m.accuracy_vs_best.has_value());
    CHECK(out.timings.repetition_seconds.size() == 1);
}

TEST_CASE("run_experiment: external prediction files and PCA view") {
    SyntheticData data;
    auto cfg = load_config(data.config("external = ext.csv", 2, 1, "view2_pca_dim = 2"));
    const auto out = run_experiment(cfg);
    CHECK(out.report.all_completed());
    CHECK(out.report.view2_dim == 2);
    CHECK(out.report.method_names().size() == 5);
    CHECK(out.report.methods[1].accuracy_vs_best.has_value());
}

TEST_CASE("run_experiment: identical reports regardless of thread count") {
    SyntheticData data;
    auto cfg = load_config(data.config("", 4, 1));
    const auto serial = Json(run_experiment(cfg).report).dump();
    cfg.jobs = 3;
    const auto parallel = Json(run_experiment(cfg).report).dump();
    CHECK(serial == parallel);
    cfg.split.seed = 99;
    CHECK(Json(run_experiment(cfg).report).dump() != serial);
}

TEST_CASE("aggregates match the per-repetition rows") {
    SyntheticData data;
    const auto report = run_experiment(load_config(data.config("", 5, 1))).report;
    const auto names = report.method_names();
    for (std::size_t m = 0; m < names.size(); ++m) {
        std::vector<double> acc, f1, best;
        for (const auto& rep : report.repetitions) {
            const auto s = repetition_scores(report, rep);
            acc.push_back(s[m].accuracy);
            f1.push_back(s[m].f_score);
            best.push_back(rep.best_accuracy);
        }
        const auto& summary = report.methods[m];
        CHECK(summary.method == names[m]);
        CHECK(std::abs(summary.accuracy.mean - summarize(acc).mean) <= 1e-12);
        CHECK(std::abs(summary.accuracy.stddev - summarize(acc).stddev) <= 1e-12);
        CHECK(std::abs(summary.f_score.mean - summarize(f1).mean) <= 1e-12);
        if (m == 0) {
            CHECK_FALSE(summary.accuracy_vs_best.has_value());
        } else {
            REQUIRE(summary.accuracy_vs_best.has_value());
            const auto t = paired_t_test(acc, best);
            CHECK(summary.accuracy_vs_best->verdict == t.verdict);
        }
    }
    auto copy = report;
    aggregate(copy);
    CHECK(Json(copy).dump() == Json(report).dump());
}

TEST_CASE("emit_report writes files that parse back to the same report") {
    SyntheticData data;
    const auto out = run_experiment(load_config(data.config("", 3, 1)));
    TempDir dir;
    const auto target = dir.file("nested/report");
    emit_report(out.report, out.timings, target);
    for (const char* f : {"report.json", "timings.json", "report.txt", "scores.csv"})
        CHECK(std::filesystem::exists(std::filesystem::path(target) / f));

    const auto back = read_json_file(target + "/report.json").get<ExperimentReport>();
    CHECK(Json(back).dump() == Json(out.report).dump());
    CHECK(back.repetitions == out.report.repetitions);
    const auto json_text = sec::testing::slurp(target + "/report.json");
    CHECK(json_text.find("seconds") == std::string::npos);
    CHECK(sec::testing::slurp(target + "/timings.json").find("total_seconds") != std::string::npos);

    const auto text = sec::testing::slurp(target + "/report.txt");
    std::size_t marks = 0;
    for (const char* mark : {"•", "⊙", "○"})
        for (auto pos = text.find(mark); pos != std::string::npos; pos = text.find(mark, pos + 1)) ++marks;
    // Two scored columns per non-Best method, plus the legend line's three marks.
    CHECK(marks == 2 * (out.report.methods.size() - 1) + 3);

    const auto csv = sec::testing::slurp(target + "/scores.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 4);
}

TEST_CASE("empty report serializes with empty arrays") {
    ExperimentReport r;
    r.name = "empty";
    const Json j = r;
    CHECK(j.at("repetitions").is_array());
    CHECK(j.at("repetitions").empty());
    CHECK(j.at("methods").empty());
    CHECK(j.at("schema_version") == 1);
    TempDir dir;
    emit_report(r, {}, dir.file("e"));
    CHECK(read_json_file(dir.file("e/report.json")).get<ExperimentReport>().name == "empty");
    CHECK(r.all_completed());  // nothing planned, nothing missing
}

TEST_CASE("report schema version is checked on load") {
    Json j = ExperimentReport{};
    j["schema_version"] = 2;
    CHECK_THROWS_AS(j.get<ExperimentReport>(), InputError);
    TempDir dir;
    CHECK_THROWS_AS(read_json_file(dir.write("bad.json", "{ not json")), ParseError);
}

TEST_CASE("adapted model JSON round trip and view-2 pairing") {
    std::mt19937_64 rng(92);
    const auto ids = sec::testing::covering_ids(20, 2, rng);
    const auto Y = LabelMatrix::from_class_ids(ids, 2, LabelEncoding::pm1);
    auto X2 = std::make_shared<const Matrix>(sec::testing::random_matrix(3, 20, rng));
    const auto r = adapt_classifier({sec::testing::random_matrix(2, 20, rng), "ridge"}, Y, X2, KernelSpec::rbf(0.5), 1.0);
    const Json j = r.model;
    CHECK(j.at("kernel").at("family") == "rbf");
    auto back = j.get<AdaptedModel>();
    CHECK(back.T == r.model.T);
    CHECK(back.b == r.model.b);
    CHECK(back.lambda1 == r.model.lambda1);
    CHECK(back.baseline_id == "ridge");
    CHECK(back.view2_hash == r.model.view2_hash);
    CHECK_FALSE(back.view2_train);

    CHECK_THROWS_AS(attach_view2(back, std::make_shared<const Matrix>(*X2 * 2.0)), InputError);
    attach_view2(back, X2);
    const Matrix F = sec::testing::random_matrix(2, 4, rng), Xt = sec::testing::random_matrix(3, 4, rng);
    CHECK(predict_adapted(back, {F, ""}, Xt).values == predict_adapted(r.model, {F, ""}, Xt).values);

    Json broken = j;
    broken["T"]["rows"] = 3;
    CHECK_THROWS_AS(broken.get<AdaptedModel>(), InputError);
    CHECK_FALSE(j.contains("W"));

    // Linear kernel with fewer features than samples carries primal weights.
    const auto lin = adapt_classifier({sec::testing::random_matrix(2, 20, rng), "ridge"}, Y, X2, KernelSpec::linear(), 1.0);
    REQUIRE(lin.model.W);
    const auto lin_back = Json(lin.model).get<AdaptedModel>();
    REQUIRE(lin_back.W);
    CHECK(*lin_back.W == *lin.model.W);
    CHECK(predict_adapted(lin_back, {F, ""}, Xt).values == predict_adapted(lin.model, {F, ""}, Xt).values);
    Json bad_w = Json(lin.model);
    bad_w["W"] = Json(lin.model)["T"];
    CHECK_THROWS_AS(bad_w.get<AdaptedModel>(), InputError);

    CHECK_THROWS_AS(hash_from_string("md5:00"), InputError);
    CHECK(hash_from_string(hash_to_string(0x0123456789abcdefull)) == 0x0123456789abcdefull);
}

TEST_CASE("security report and t-test JSON round trips") {
    SecurityReport s;
    s.condition_counts = {1, 3};
    s.max_count = 3;
    s.baselines = 3;
    s.distances = {4.0, 2.0, 0.9, 0.95};
    s.secure = true;
    s.certified = true;
    CHECK(Json(s).get<SecurityReport>() == s);

    TTestResult t{std::numeric_limits<double>::infinity(), 4, 0.0, Verdict::win};
    const Json jt = t;
    CHECK(jt.at("t").is_null());
    const auto tb = jt.get<TTestResult>();
    CHECK(std::isinf(tb.t));
    CHECK(tb.t > 0);
    CHECK(tb.verdict == Verdict::win);
}

TEST_CASE("integration solution JSON carries telemetry") {
    const auto a = LabelMatrix::from_class_ids(std::vector<int>{0}, 2, LabelEncoding::zero_one);
    const auto b = LabelMatrix::from_class_ids(std::vector<int>{1}, 2, LabelEncoding::zero_one);
    const Json j = integrate({a, b}, {a, b});
    CHECK(j.at("feasible") == false);
    CHECK(j.at("epsilon").get<double>() == doctest::Approx(-0.5));
    CHECK(j.at("labels") == Json::array({0}));
    CHECK(j.at("warning").is_null());
}
