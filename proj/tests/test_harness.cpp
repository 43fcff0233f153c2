#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rdid/harness.hpp"

using namespace rdid;
namespace fs = std::filesystem;

namespace {
RunConfig reference_config(int n, double t_end) {
    RunConfig c;
    c.params.lambda = 3.0;
    c.params.k_true = 2.0;
    c.params.gamma = 2.0;
    c.params.rho = 4.5;
    c.params.y_r = 1.0;
    c.params.alpha = 2.0;
    c.n = n;
    c.loop.dt = 1e-3;
    c.loop.t_end = t_end;
    c.loop.record_every = 10;
    c.u0_poly = {0.0, 0.0, 1.75};
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "rdid_harness_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}
} // namespace

TEST(RunSingle, TracksReferenceAndRecoversGain) {
    const RunConfig cfg = reference_config(101, 4.0);
    const RunResult res = run_single(cfg);
    ASSERT_FALSE(res.alarmed);
    EXPECT_LE(std::abs(res.y_final - 1.0), 1e-3);
    EXPECT_LE(std::abs(res.k_hat_final - 2.0), 1e-3);
    EXPECT_GT(res.release_time, 0.0);
    EXPECT_LE(res.release_time, 0.1);
    // recording stride: samples 1 + t_end/(dt*record_every)
    EXPECT_EQ(res.series.size(), 401u);
    EXPECT_EQ(res.series.t.front(), 0.0);
    EXPECT_DOUBLE_EQ(res.series.t.back(), 4.0);
}

TEST(RunSingle, CompositeFunctionalDecaysMonotonically) {
    const RunConfig cfg = reference_config(101, 4.0);
    const RunResult res = run_single(cfg);
    ASSERT_FALSE(res.alarmed);
    ASSERT_TRUE(res.cert.valid);
    for (size_t i = 0; i + 1 < res.series.size(); ++i)
        EXPECT_LE(res.series.V[i + 1], res.series.V[i] * (1.0 + 1e-6)) << "sample " << i;
    ASSERT_TRUE(res.v_fit_ok);
    EXPECT_GT(res.v_fit.sigma, 0.0);
    EXPECT_GE(res.v_fit.r2, 0.98);
}

TEST(RunSingle, GainEstimateApproachesMonotonicallyAfterRelease) {
    const RunConfig cfg = reference_config(101, 4.0);
    const RunResult res = run_single(cfg);
    ASSERT_FALSE(res.alarmed);
    size_t start = 0;
    while (start < res.series.size() && res.series.k_hat[start] == 0.0) ++start;
    ASSERT_LT(start, res.series.size());
    for (size_t i = start; i + 1 < res.series.size(); ++i) {
        const double before = std::abs(res.series.k_hat[i] - cfg.params.k_true);
        const double after = std::abs(res.series.k_hat[i + 1] - cfg.params.k_true);
        EXPECT_LE(after, before + 1e-3) << "sample " << i;
    }
}

TEST(RunSingle, CascadeFunctionalDecaysAfterRelease) {
    // U = V + theta W, checked over a window where the observer error is
    // still far above its resolution-limited floor.
    const RunConfig cfg = reference_config(101, 4.0);
    const RunResult res = run_single(cfg);
    ASSERT_FALSE(res.alarmed);
    size_t start = 0;
    while (start < res.series.size() && res.series.k_hat[start] == 0.0) ++start;
    for (size_t i = start; i + 1 < res.series.size(); ++i) {
        const double u0 = res.series.V[i] + cfg.theta * res.series.W[i];
        const double u1 = res.series.V[i + 1] + cfg.theta * res.series.W[i + 1];
        EXPECT_LE(u1, u0 * (1.0 + 1e-6)) << "sample " << i;
    }
}

TEST(RunSingle, DisabledBlocksRecordZeroColumns) {
    RunConfig cfg = reference_config(51, 1.0);
    cfg.observer = false;
    cfg.estimator = false;
    cfg.params.y_r = 1.0;
    const RunResult res = run_single(cfg);
    ASSERT_FALSE(res.alarmed);
    for (size_t i = 0; i < res.series.size(); ++i) {
        EXPECT_EQ(res.series.k_hat[i], 0.0);
        EXPECT_EQ(res.series.W[i], 0.0);
        EXPECT_EQ(res.series.eta_l2[i], 0.0);
    }
    for (double v : res.u_hat_final) EXPECT_EQ(v, 0.0);
}

TEST(RunSingle, EstimatorOffAllowsZeroReference) {
    RunConfig cfg = reference_config(51, 1.0);
    cfg.estimator = false;
    cfg.params.y_r = 0.0;
    const RunResult res = run_single(cfg);
    EXPECT_FALSE(res.alarmed);
    EXPECT_LE(std::abs(res.y_final), 0.5); // regulation toward zero under way
}

TEST(RunSingle, NoiseIsDeterministicPerSeed) {
    RunConfig cfg = reference_config(51, 1.0);
    cfg.noise_y_std = 1e-3;
    cfg.seed = 99;
    const RunResult a = run_single(cfg);
    const RunResult b = run_single(cfg);
    ASSERT_EQ(a.series.size(), b.series.size());
    for (size_t i = 0; i < a.series.size(); ++i) {
        EXPECT_EQ(a.series.eta_l2[i], b.series.eta_l2[i]);
        EXPECT_EQ(a.series.y[i], b.series.y[i]);
    }
    cfg.seed = 100;
    const RunResult c = run_single(cfg);
    bool differs = false;
    for (size_t i = 0; i < a.series.size() && !differs; ++i)
        differs = a.series.eta_l2[i] != c.series.eta_l2[i];
    EXPECT_TRUE(differs);
}

TEST(RunSingle, NonFiniteStateAlarmsAndTruncates) {
    RunConfig cfg = reference_config(51, 1.0);
    cfg.u0_poly = {1e308}; // V ~ u0^2 overflows on the first record
    const RunResult res = run_single(cfg);
    EXPECT_TRUE(res.alarmed);
    EXPECT_EQ(res.series.size(), 0u);
    EXPECT_EQ(res.alarm_time, 0.0);

    const fs::path dir = fresh_dir("alarm");
    RunConfig out_cfg = cfg;
    out_cfg.out_dir = dir.string();
    emit_outputs(res, out_cfg, /*plots=*/false);
    const std::string csv = slurp((dir / "timeseries.csv").string());
    EXPECT_NE(csv.find("t,y,chi,v,k_hat,V,W,eta_l2"), std::string::npos);
    EXPECT_NE(csv.find("# truncated: numerical alarm"), std::string::npos);
}

TEST(EmitOutputs, WritesContractedFiles) {
    RunConfig cfg = reference_config(51, 1.0);
    const fs::path dir = fresh_dir("emit");
    cfg.out_dir = dir.string();
    const RunResult res = run_single(cfg);
    emit_outputs(res, cfg, /*plots=*/true);
    const std::string ts = slurp((dir / "timeseries.csv").string());
    EXPECT_EQ(ts.rfind("t,y,chi,v,k_hat,V,W,eta_l2\n", 0), 0u);
    const std::string snap = slurp((dir / "snapshot.csv").string());
    EXPECT_EQ(snap.rfind("x,u,u_hat,u_bar\n", 0), 0u);
    // one row per node plus header
    EXPECT_EQ(std::count(snap.begin(), snap.end(), '\n'), 52);
    EXPECT_TRUE(fs::exists(dir / "meta.txt"));
    for (const char* name : {"y.svg", "k_hat.svg", "profiles.svg", "lyapunov.svg"})
        EXPECT_TRUE(fs::exists(dir / name)) << name;

    const fs::path dir2 = fresh_dir("emit_noplots");
    cfg.out_dir = dir2.string();
    emit_outputs(res, cfg, /*plots=*/false);
    EXPECT_FALSE(fs::exists(dir2 / "y.svg"));
    EXPECT_TRUE(fs::exists(dir2 / "timeseries.csv"));
}

TEST(EmitOutputs, ByteIdenticalAcrossRepeatedRuns) {
    RunConfig cfg = reference_config(51, 1.0);
    const fs::path da = fresh_dir("det_a");
    const fs::path db = fresh_dir("det_b");
    cfg.out_dir = da.string();
    emit_outputs(run_single(cfg), cfg, false);
    cfg.out_dir = db.string();
    emit_outputs(run_single(cfg), cfg, false);
    EXPECT_EQ(slurp((da / "timeseries.csv").string()), slurp((db / "timeseries.csv").string()));
    EXPECT_EQ(slurp((da / "snapshot.csv").string()), slurp((db / "snapshot.csv").string()));
}

TEST(RunSweep, PerCellResultsAndSummary) {
    RunConfig cfg = reference_config(51, 2.0);
    const fs::path dir = fresh_dir("sweep");
    cfg.out_dir = dir.string();
    const std::vector<SweepCell> cells = run_sweep(cfg, "k_true", {1.0, 2.0}, false);
    ASSERT_EQ(cells.size(), 2u);
    for (const SweepCell& c : cells) {
        EXPECT_TRUE(c.ok) << c.error;
        EXPECT_LE(std::abs(c.k_hat_final - c.value) / c.value, 0.02) << "k = " << c.value;
    }
    EXPECT_TRUE(fs::exists(dir / "k_true=1" / "timeseries.csv"));
    EXPECT_TRUE(fs::exists(dir / "k_true=2" / "timeseries.csv"));
    const std::string summary = slurp((dir / "sweep_summary.csv").string());
    EXPECT_EQ(summary.rfind("axis,value,status,y_final,k_hat_final,sigma_V,r2_V,message\n", 0),
              0u);
    EXPECT_NE(summary.find("k_true,1,ok"), std::string::npos);
}

TEST(RunSweep, FailedCellsAreRecordedWithoutAborting) {
    RunConfig cfg = reference_config(51, 2.0);
    const fs::path dir = fresh_dir("sweep_fail");
    cfg.out_dir = dir.string();
    const std::vector<SweepCell> cells = run_sweep(cfg, "lambda", {-1.0, 3.0}, false);
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_FALSE(cells[0].ok);
    EXPECT_NE(cells[0].error.find("validation"), std::string::npos);
    EXPECT_TRUE(cells[1].ok) << cells[1].error;
    const std::string summary = slurp((dir / "sweep_summary.csv").string());
    EXPECT_NE(summary.find("lambda,-1,error"), std::string::npos);
}

TEST(RunSweep, EmptyValueListIsSuccessfulNoop) {
    RunConfig cfg = reference_config(51, 2.0);
    const fs::path dir = fresh_dir("sweep_empty");
    cfg.out_dir = dir.string();
    const std::vector<SweepCell> cells = run_sweep(cfg, "k_true", {}, false);
    EXPECT_TRUE(cells.empty());
    EXPECT_TRUE(fs::exists(dir / "sweep_summary.csv"));
}

TEST(RunSweep, UnknownAxisIsRejected) {
    RunConfig cfg = reference_config(51, 2.0);
    EXPECT_THROW(run_sweep(cfg, "flux_capacitance", {1.0}, false), validation_error);
}

TEST(RunConvergence, SecondOrderUnderNestedRefinement) {
    const RunConfig cfg = reference_config(51, 2.0);
    const ConvergenceStudy study = run_convergence(cfg);
    ASSERT_EQ(study.rows.size(), 4u);
    for (size_t i = 0; i + 1 < study.rows.size(); ++i)
        EXPECT_GT(study.rows[i].err, study.rows[i + 1].err) << "row " << i;
    EXPECT_GT(study.order, 1.8);
    EXPECT_LT(study.order, 2.2);
}
