#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"

using cli_test::run;
using cli_test::scratch;
using cli_test::slurp;
using cli_test::write_file;

namespace {

std::string row_value(const std::string& out, const std::string& key) {
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
    return {};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(CliBounds, ReportedSampleSizes) {
    auto r = run("bounds --n 18 --delta 0.01 --gamma 0.1 --gamma0 0.1 --c 2");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(row_value(r.out, "t_bs"), "6551");
    EXPECT_EQ(row_value(r.out, "as_warmup"), "430");
    r = run("bounds --n 18 --delta 0.01 --gamma 0.1 --gamma0 0.1 --c 4");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(row_value(r.out, "t_bs"), "3276");
    EXPECT_EQ(row_value(r.out, "threshold_b"), "245.661");
    EXPECT_EQ(row_value(r.out, "t_cs_avg"), "2456.61");
    EXPECT_EQ(row_value(r.out, "as_warmup"), "215");
    EXPECT_EQ(lines(r.out).size(), 9u);
}

TEST(CliBounds, MissingFlag) {
    const auto r = run("bounds --n 18 --delta 0.01 --gamma 0.1 --c 2");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_TRUE(r.out.empty());
}

TEST(CliBounds, InvalidValue) {
    EXPECT_EQ(run("bounds --n 18 --delta 1.5 --gamma 0.1 --gamma0 0.1 --c 2").exit_code, 2);
    EXPECT_EQ(run("bounds --n 18 --delta 0.01 --gamma 0.2 --gamma0 0.1 --c 2").exit_code, 2);
}

TEST(CliSimulate, DeterministicAndJobsInvariant) {
    const auto a = scratch("sim_a.csv"), b = scratch("sim_b.csv"), c = scratch("sim_c.csv");
    ASSERT_EQ(run("simulate --algo as --gamma0 0.2 --runs 30 --seed 7 --csv " + a.string()).exit_code, 0);
    ASSERT_EQ(run("simulate --algo as --gamma0 0.2 --runs 30 --seed 7 --csv " + b.string()).exit_code, 0);
    ASSERT_EQ(run("simulate --algo as --gamma0 0.2 --runs 30 --seed 7 --jobs 4 --csv " + c.string()).exit_code, 0);
    const auto text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(text, slurp(c));
    const auto rows = lines(text);
    ASSERT_EQ(rows.size(), 33u);
    EXPECT_EQ(rows[0], "trial,seed,chosen,steps,mistake,final_eps,ratio");
    EXPECT_EQ(rows[31].rfind("mean,", 0), 0u);
}

TEST(CliSimulate, BatchStepsFollowFormula) {
    const auto r = run("simulate --algo bs --gamma 0.05 --gamma0 0.2 --c 4 --runs 5 --seed 3");
    ASSERT_EQ(r.exit_code, 0);
    const auto rows = lines(r.out);
    for (std::size_t i = 1; i <= 5; ++i) {
        std::istringstream in(rows[i]);
        std::string field;
        for (int k = 0; k < 4; ++k) std::getline(in, field, ',');
        EXPECT_EQ(field, "13102");
    }
}

TEST(CliSimulate, ValidationAndIo) {
    EXPECT_EQ(run("simulate --runs 0").exit_code, 2);
    EXPECT_EQ(run("simulate --algo xyz").exit_code, 2);
    EXPECT_EQ(run("simulate --runs 2 --csv /nonexistent-dir/x.csv").exit_code, 3);
    EXPECT_EQ(run("simulate --config /nonexistent-dir/cfg.txt").exit_code, 3);
}

TEST(CliSimulate, ConfigFileWithFlagOverride) {
    const auto cfg = scratch("exp.cfg");
    write_file(cfg, "algo = bs\ngamma0 = 0.2\ngamma = 0.05\nruns = 2\n");
    auto r = run("simulate --config " + cfg.string());
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find(",13102,"), std::string::npos);
    r = run("simulate --config " + cfg.string() + " --gamma 0.1");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find(",3276,"), std::string::npos);
}

TEST(CliSimulate, ClassFile) {
    const auto cls = scratch("class.txt");
    write_file(cls, "0, 0.45\n1, 0.75\n2, 0.55\n");
    const auto r = run("simulate --algo as --runs 3 --class-file " + cls.string());
    ASSERT_EQ(r.exit_code, 0);
    write_file(cls, "0, 1.45\n");
    EXPECT_EQ(run("simulate --algo as --runs 3 --class-file " + cls.string()).exit_code, 5);
}

TEST(CliSweep, RowCountAndAdaptiveColumn) {
    auto r = run("sweep --param gamma --gamma0 0.2 --runs 3 --algos as,cs --from 0.05 --to 0.2 --step 0.05");
    ASSERT_EQ(r.exit_code, 0);
    auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 1u + 4 * 2);
    EXPECT_EQ(rows[0], "param,algo,mean_steps,stddev,error_rate,mean_final_eps");
    std::string as_steps;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream in(rows[i]);
        std::string param, algo, steps;
        std::getline(in, param, ',');
        std::getline(in, algo, ',');
        std::getline(in, steps, ',');
        if (algo != "as") continue;
        if (as_steps.empty()) as_steps = steps;
        EXPECT_EQ(steps, as_steps);
    }
    EXPECT_EQ(run("sweep --param gamma --gamma0 0.1 --from 0.05 --to 0.2 --step 0.05").exit_code, 2);
    EXPECT_EQ(run("sweep --param delta").exit_code, 2);
}

TEST(CliSweep, SinglePointMatchesSimulate) {
    const auto sweep = run("sweep --algos cs --gamma0 0.2 --from 0.2 --to 0.2 --step 0.004 --runs 5 --seed 4");
    const auto sim = run("simulate --algo cs --gamma0 0.2 --runs 5 --seed 4");
    ASSERT_EQ(sweep.exit_code, 0);
    ASSERT_EQ(sim.exit_code, 0);
    const auto sweep_row = lines(sweep.out).at(1);
    std::string mean_steps = sweep_row.substr(sweep_row.find("cs,") + 3);
    mean_steps = mean_steps.substr(0, mean_steps.find(','));
    const auto mean_row = lines(sim.out).at(6);
    EXPECT_EQ(mean_row.substr(0, 8 + mean_steps.size()), "mean,,," + mean_steps + ",");
}

TEST(CliSweep, DefaultGridHas65Points) {
    const auto r = run("sweep --algos bs --runs 1");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(lines(r.out).size(), 66u);
}

TEST(CliCalibrate, ReportsSafeConstantAndTrace) {
    const auto trace = scratch("trace.csv");
    const auto r = run("calibrate --algo as --gamma0 0.25 --runs 30 --c-step 0.5 --csv " + trace.string());
    ASSERT_EQ(r.exit_code, 0);
    const double c = std::stod(row_value(r.out, "safe_c"));
    EXPECT_GE(c, 4.0);
    const auto rows = lines(slurp(trace));
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows[0], "c,mistakes");
    long prev = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long m = std::stol(rows[i].substr(rows[i].find(',') + 1));
        EXPECT_GE(m, prev);
        prev = m;
    }
}

TEST(CliCalibrate, FailureExitCode) {
    const auto r = run("calibrate --algo bs --gamma0 0.04 --runs 30 --c-min 400 --c-max 401 --c-step 1");
    EXPECT_EQ(r.exit_code, 4);
}

TEST(CliSelect, ShortMatrixExhausts) {
    const auto m = scratch("m3.csv");
    write_file(m, "h0,h1,h2\n0,1,0\n0,1,1\n1,1,0\n");
    const auto r = run("select --matrix " + m.string() + " --algo as");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(row_value(r.out, "chosen"), "1");
    EXPECT_EQ(row_value(r.out, "steps"), "3");
    EXPECT_EQ(row_value(r.out, "stop_reason"), "exhausted");
}

TEST(CliSelect, ConstrainedCrossesThreshold) {
    // Column 2 always right, others always wrong. n=4, delta=0.1, gamma=0.5, c=8:
    // B = 12 ln(80) / 4 = 13.146; fixed dec: w2 = t/2 crosses at t = 27.
    const auto m = scratch("m_cs.csv");
    std::string text = "h0,h1,h2,h3\n";
    for (int i = 0; i < 200; ++i) text += "0,0,1,0\n";
    write_file(m, text);
    const auto r =
        run("select --matrix " + m.string() + " --algo cs --dec fixed --delta 0.1 --gamma 0.5 --c 8");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(row_value(r.out, "chosen"), "2");
    EXPECT_EQ(row_value(r.out, "steps"), "27");
    EXPECT_EQ(row_value(r.out, "stop_reason"), "threshold");
}

TEST(CliSelect, BatchWithExplicitM) {
    const auto m = scratch("m_bs.csv");
    write_file(m, "h0,h1\n0,1\n1,1\n1,0\n1,0\n");
    auto r = run("select --matrix " + m.string() + " --algo bs --m 2");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(row_value(r.out, "chosen"), "1");
    EXPECT_EQ(row_value(r.out, "steps"), "2");
    r = run("select --matrix " + m.string() + " --algo bs");
    EXPECT_EQ(r.exit_code, 2);
}

TEST(CliSelect, MalformedMatrix) {
    const auto m = scratch("bad.csv");
    write_file(m, "h0,h1,h2\n0,1,0\n0,1\n");
    EXPECT_EQ(run("select --matrix " + m.string() + " --algo as").exit_code, 5);
    write_file(m, "h0,h1\n0,7\n");
    EXPECT_EQ(run("select --matrix " + m.string() + " --algo as").exit_code, 5);
    EXPECT_EQ(run("select --matrix /nonexistent-dir/m.csv --algo as").exit_code, 3);
}
