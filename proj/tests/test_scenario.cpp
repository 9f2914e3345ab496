#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qze/scenario.hpp"

using namespace qze;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qze_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QZE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::BadParameter;  // sentinel: nothing thrown
}

} // namespace

TEST(Config, ParsesKeysAndComments) {
    const auto cfg = parse_config(
        "# comment\n"
        "gamma = 2   # trailing\n"
        "eta = 1.5\n"
        "delta=15.9\n"
        "flat = true\n"
        "products = report, evolve\n"
        "sweep_eta = 1, 2, 3\n"
        "out = somewhere\n");
    EXPECT_EQ(cfg.products.size(), 2u);
    EXPECT_EQ(cfg.sweep_eta.size(), 3u);
    EXPECT_EQ(cfg.out_dir, fs::path("somewhere"));
    const auto p = apply_settings(ModelParams{}, cfg.model);
    EXPECT_DOUBLE_EQ(p.gamma, 2.0);
    EXPECT_DOUBLE_EQ(p.band.eta, 1.5);
    EXPECT_TRUE(p.band.is_flat());
}

TEST(Config, Errors) {
    EXPECT_EQ(code_of([] { parse_config("colour = red\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_config("eta = fast\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_config("eta 3\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_config("products = fig9\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_config("sweep_eta = ,\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { parse_config("n = 2.5\n"); }), ErrorCode::ConfigError);
}

TEST(Config, OverrideWins) {
    auto cfg = parse_config("eta = 1\n");
    apply_override(cfg, "eta=4");
    EXPECT_DOUBLE_EQ(apply_settings(ModelParams{}, cfg.model).band.eta, 4.0);
    EXPECT_THROW(apply_override(cfg, "eta"), Error);
}

TEST(Csv, RoundTrip) {
    Table t{{"a", "b"}, {{1.0, -2.5e-13}, {3.141592653589793, 1e300}}};
    const auto back = parse_csv(to_csv(t));
    EXPECT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_NEAR(back.rows[1][0], 3.141592653589793, 1e-11);
    EXPECT_DOUBLE_EQ(back.rows[0][1], -2.5e-13);
    EXPECT_THROW(parse_csv("a,b\n1\n"), Error);
    EXPECT_THROW(parse_csv(""), Error);
}

TEST(Scenario, EvolveWithoutDetectorIsExponential) {
    ScenarioConfig cfg;
    cfg.out_dir = scratch("evolve");
    cfg.products = {Product::Evolve};
    run_scenario(cfg);
    const auto t = read_csv(cfg.out_dir / "evolve.csv");
    EXPECT_EQ(t.columns, (std::vector<std::string>{"t", "s", "eps", "r", "norm_defect"}));
    const auto ts = t.values("t"), s = t.values("s");
    bool seen = false;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] == 1.0) {
            EXPECT_NEAR(s[i], 0.367879, 1e-6);
            seen = true;
        }
    EXPECT_TRUE(seen);
}

TEST(Scenario, EvolveCsvPassesInvariantsOnReingest) {
    ScenarioConfig cfg = parse_config("eta = 1.5\ndelta = 15.915494309189533\nproducts = evolve\n");
    cfg.out_dir = scratch("evolve_inv");
    run_scenario(cfg);
    const auto t = read_csv(cfg.out_dir / "evolve.csv");
    for (const auto& r : t.rows) {
        EXPECT_GE(r[1], 0.0);
        EXPECT_LE(r[1], 1.0);
        EXPECT_NEAR(r[1] + r[2] + r[3], 1.0, r[4] + 1e-11);
        EXPECT_LT(r[4], 1e-6);
    }
}

TEST(Scenario, FormFactorCsvPassesInvariantsOnReingest) {
    ScenarioConfig cfg = parse_config("eta = 10\ndelta = 15.915494309189533\nproducts = formfactor\n");
    cfg.out_dir = scratch("ff");
    const auto res = run_scenario(cfg);
    const auto t = read_csv(cfg.out_dir / "formfactor.csv");
    for (const auto& r : t.rows) {
        EXPECT_GT(r[1], 0.0);
        EXPECT_NEAR(r[2], r[1] * two_pi, 1e-10);
    }
    EXPECT_EQ(res[0].products[0].scalars[0].first, "g2_omega");
}

TEST(Scenario, ReportForFig3Solid) {
    ScenarioConfig cfg = parse_config("eta = 100\ndelta = 15.915494309189533\nproducts = report\n");
    cfg.out_dir = scratch("report");
    const auto text = summary_text(run_scenario(cfg));
    EXPECT_NE(text.find("gamma_over_delta=0.0628"), std::string::npos) << text;
    EXPECT_NE(text.find("tau_delta=0.159"), std::string::npos) << text;
    EXPECT_NE(text.find("verdict=QZE-regime"), std::string::npos) << text;
    EXPECT_EQ(slurp(cfg.out_dir / "summary.txt"), text);
}

TEST(Scenario, Fig2DipDeepens) {
    ScenarioConfig cfg;
    cfg.out_dir = scratch("fig2");
    cfg.products = {Product::Fig2};
    run_scenario(cfg);
    double prev = 2.0;
    for (const char* rho : {"0.01", "0.1", "1"}) {
        const auto t = read_csv(cfg.out_dir / (std::string("fig2_rho") + rho + ".csv"));
        const auto mu = t.values("mu"), ratio = t.values("g2_over_free");
        double at_centre = 0.0, best = 1e9;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (std::abs(mu[i]) < best) {
                best = std::abs(mu[i]);
                at_centre = ratio[i];
            }
        EXPECT_LT(at_centre, prev) << rho;
        prev = at_centre;
    }
}

TEST(Scenario, Fig3WithoutDetectorIsFlat) {
    ScenarioConfig cfg = parse_config("eta = 0\n");
    cfg.out_dir = scratch("fig3_free");
    cfg.products = {Product::Fig3};
    cfg.samples = 50;
    run_scenario(cfg);
    for (int set = 1; set <= 3; ++set) {
        const auto t = read_csv(cfg.out_dir / ("fig3_set" + std::to_string(set) + ".csv"));
        for (double r : t.values("log_s_over_gamma_t")) EXPECT_NEAR(r, -1.0, 1e-9);
    }
    const auto refs = read_csv(cfg.out_dir / "fig3_references.csv");
    for (double v : refs.values("suppressed_reference")) EXPECT_NEAR(v, -1.0, 1e-12);
}

TEST(Scenario, Fig1DelayNearTau) {
    ScenarioConfig cfg;
    cfg.out_dir = scratch("fig1");
    cfg.products = {Product::Fig1};
    const auto res = run_scenario(cfg);
    double delay = 0.0, gap = 0.0;
    for (const auto& [k, v] : res[0].products[0].scalars) {
        if (k == "delay") delay = std::stod(v);
        if (k == "half_crossing_gap") gap = std::stod(v);
    }
    EXPECT_GT(delay, 0.5 / 1.5);
    EXPECT_LT(delay, 2.0 / 1.5);
    EXPECT_GT(gap, 0.0);
    const auto t = read_csv(cfg.out_dir / "fig1.csv");
    EXPECT_EQ(t.columns, (std::vector<std::string>{"t", "one_minus_s", "eps", "r"}));
}

TEST(Scenario, RerunIsByteIdentical) {
    ScenarioConfig cfg = parse_config("eta = 10\ndelta = 15.915494309189533\nproducts = evolve, spectral\nsamples = 40\n");
    cfg.out_dir = scratch("rerun_a");
    run_scenario(cfg);
    const auto first = cfg.out_dir;
    cfg.out_dir = scratch("rerun_b");
    run_scenario(cfg);
    for (const char* f : {"evolve.csv", "spectra.csv", "perturbative.csv", "survival_spectral.csv", "summary.txt"})
        EXPECT_EQ(slurp(first / f), slurp(cfg.out_dir / f)) << f;
}

TEST(Scenario, SweepIndependentOfThreadCount) {
    ScenarioConfig cfg = parse_config(
        "delta = 15.915494309189533\nsweep_eta = 1, 10, 100\nsweep_detuning = 0, 80\nproducts = formfactor, evolve\n"
        "samples = 20\n");
    cfg.out_dir = scratch("sweep1");
    const auto a = run_scenario(cfg, 1);
    const auto dir1 = cfg.out_dir;
    cfg.out_dir = scratch("sweep3");
    const auto b = run_scenario(cfg, 3);
    ASSERT_EQ(a.size(), 6u);
    EXPECT_EQ(summary_text(a), summary_text(b));
    for (const auto& r : a) {
        EXPECT_TRUE(fs::exists(dir1 / r.label / "evolve.csv")) << r.label;
        EXPECT_EQ(slurp(dir1 / r.label / "evolve.csv"), slurp(cfg.out_dir / r.label / "evolve.csv"));
    }
}

TEST(Scenario, ErrorsCarryProduct) {
    ScenarioConfig cfg = parse_config("products = report\n");  // eta = 0
    cfg.out_dir = scratch("err");
    try {
        run_scenario(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoDetector);
        EXPECT_NE(std::string(e.what()).find("report:"), std::string::npos);
    }
}

TEST(Cli, ExitCodes) {
    const auto out = scratch("cli");
    EXPECT_EQ(run_cli("evolve --out " + out.string() + " --override samples=20"), 0);
    EXPECT_TRUE(fs::exists(out / "evolve.csv"));
    EXPECT_EQ(run_cli("evolve --out " + out.string() + " --override colour=red"), 1);
    EXPECT_EQ(run_cli("evolve --config /nonexistent/file.cfg"), 1);
    EXPECT_EQ(run_cli("evolve --out " + out.string() + " --override eta=-1"), 1);
    EXPECT_EQ(run_cli("report --out " + out.string()), 2);  // no detector
    EXPECT_EQ(run_cli("evolve --out " + out.string() +
                      " --override eta=1.5 --override delta=15.9 --override norm_tolerance=1e-16"
                      " --override step_factor=0.5"),
              2);
    EXPECT_EQ(run_cli("sweep --out " + out.string()), 1);  // nothing to sweep
    EXPECT_EQ(run_cli("bogus"), 1);
}

TEST(Cli, ConfigFile) {
    const auto dir = scratch("cli_cfg");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "s.cfg");
        f << "eta = 100\ndelta = 15.915494309189533\n";
    }
    EXPECT_EQ(run_cli("report --config " + (dir / "s.cfg").string() + " --out " + (dir / "o").string()), 0);
    EXPECT_NE(slurp(dir / "o" / "report.txt").find("QZE-regime"), std::string::npos);
}
