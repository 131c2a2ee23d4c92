#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>

#include "sclt/harness.hpp"

using namespace sclt;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::invalid_argument;
}

ExperimentConfig small_clt(int threads) {
    ExperimentConfig c;
    c.experiment = Experiment::clt;
    c.spec.n = 20;
    c.spec.seed = 42;
    c.trials = 120;
    c.threads = threads;
    c.test_functions = {"z^2", "bump(0.2,0.5)"};
    return c;
}

}  // namespace

TEST(Harness, ExperimentNames) {
    for (Experiment e : {Experiment::clt, Experiment::universality, Experiment::independence, Experiment::dbm_coupling,
                         Experiment::girko_check, Experiment::edelman, Experiment::overlaps})
        EXPECT_EQ(experiment_from_name(experiment_name(e)), e);
    EXPECT_THROW(experiment_from_name("nope"), Error);
}

TEST(Harness, ConfigErrors) {
    const nlohmann::json ok = {{"experiment", "clt"}, {"n", 50}, {"seed", 1}, {"trials", 200}, {"test_functions", {"z"}}};
    const ExperimentConfig c = ExperimentConfig::from_json(ok);
    EXPECT_EQ(c.spec.n, 50);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(ExperimentConfig::from_json(c.to_json()).to_json(), c.to_json());

    nlohmann::json bad = ok;
    bad["bogus"] = 1;
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(bad); }), ErrorCode::config_error);
    bad = ok;
    bad["symmetry"] = "hermitian";
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(bad); }), ErrorCode::config_error);
    bad = ok;
    bad["n"] = "big";
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(bad); }), ErrorCode::config_error);

    ExperimentConfig few = c;
    few.trials = 10;
    EXPECT_EQ(code_of([&] { few.validate(); }), ErrorCode::config_error);
    ExperimentConfig cx = c;
    cx.spec.symmetry = Symmetry::complex;
    EXPECT_EQ(code_of([&] { cx.validate(); }), ErrorCode::config_error);

    ExperimentConfig u;
    u.experiment = Experiment::universality;
    u.spec.n = 100;
    u.trials = 100;
    u.z_points = {cplx(0.3, 0.05)};
    EXPECT_EQ(code_of([&] { u.validate(); }), ErrorCode::config_error);
    u.z_points = {cplx(0.3, 0.5)};
    EXPECT_NO_THROW(u.validate());
}

TEST(Harness, ParallelFor) {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 3, [&](std::int64_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 2, [](std::int64_t i) {
                     if (i == 7) throw Error(ErrorCode::numerical_failure, "boom");
                 }),
                 Error);
    EXPECT_GE(resolve_threads(0), 1);
    EXPECT_EQ(resolve_threads(3), 3);
}

TEST(Harness, EigenvaluesMatchEigen) {
    EnsembleSpec s;
    s.n = 30;
    s.seed = 5;
    const MatrixSample X = sample_iid(s, 0);
    const VectorXcd a = nonhermitian_eigenvalues(X);
    const VectorXcd b = Eigen::ComplexEigenSolver<MatrixXcd>(X.data, false).eigenvalues();
    ASSERT_EQ(a.size(), 30);
    for (int i = 0; i < 30; ++i) {
        double best = 1e9;
        for (int j = 0; j < 30; ++j) best = std::min(best, std::abs(a(i) - b(j)));
        EXPECT_LT(best, 1e-10);
    }
    // real input: spectrum closed under conjugation
    cplx sum = 0.0;
    for (int i = 0; i < 30; ++i) sum += a(i);
    EXPECT_NEAR(sum.imag(), 0.0, 1e-10);
    EXPECT_NEAR(sum.real(), X.data.trace().real(), 1e-10);
}

TEST(Harness, TrialsReproducibleAcrossThreadCounts) {
    const auto a = run_trials(small_clt(1));
    const auto b = run_trials(small_clt(3));
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].trial_index, static_cast<std::int64_t>(i));
        EXPECT_EQ(a[i].linear_statistics, b[i].linear_statistics);
    }
    // sum of eigenvalues squared equals Tr X^2 up to centering
    EXPECT_FALSE(a[0].failed);
}

TEST(Harness, PersistRoundtrip) {
    const auto a = run_trials(small_clt(0));
    const std::string p = (fs::temp_directory_path() / "sclt_trials.jsonl").string();
    persist(a, p, small_clt(0).to_json());
    long last = -2;
    const auto b = load_trials(p, &last);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(last, static_cast<long>(a.size()) - 1);
    for (size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]) << i;
    fs::remove(p);
}

TEST(Harness, SummaryAgainstPrediction) {
    const ExperimentConfig c = small_clt(0);
    const SummaryStats s = summarize_clt(c, run_trials(c));
    ASSERT_EQ(s.functions.size(), 2u);
    EXPECT_EQ(s.trials, 120);
    EXPECT_NEAR(s.functions[0].predicted_variance, 2.0, 1e-6);
    EXPECT_LT(std::abs(s.functions[0].z_mean), 5.0);
    EXPECT_FALSE(s.functions[0].normal_re.has_value());  // fewer than 500 trials
    EXPECT_EQ(s.covariance.rows(), 2);
}

TEST(Harness, ShippedConfigsValidate) {
    int seen = 0;
    for (const auto& e : fs::directory_iterator(SCLT_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        const ExperimentConfig c = load_config(e.path().string());
        EXPECT_NO_THROW(c.validate()) << e.path();
        ++seen;
    }
    EXPECT_GE(seen, 7);
}
