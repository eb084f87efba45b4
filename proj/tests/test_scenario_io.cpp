#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "hydrostore/driver.hpp"
#include "hydrostore/errors.hpp"
#include "hydrostore/output.hpp"

using namespace hydrostore;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::path(HYDROSTORE_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int parse_error_line(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

const char* kSmall = R"(
# small run
grid.cells = 16
stepper.dt = 0.01
run.t_end = 0.1
run.output_every = 5
init.theta.profile = gaussian
init.theta.base = 1
init.theta.amplitude = 0.3
init.chi.profile = ramp
init.chi.low = 0.2
init.chi.high = 0.7
)";

}  // namespace

TEST_CASE("parse_scenario defaults") {
    const Scenario s = parse_scenario("");
    CHECK(s.model.mu == 1.0);
    CHECK(s.model.nu == 1e-3);
    CHECK(s.model.gamma == 0.0);
    CHECK(s.model.h.family == HFamily::Atan);
    CHECK(s.grid.dim == 1);
    CHECK(s.mode == Mode::Run);
    CHECK(s.step_count() == 1000);
}

TEST_CASE("parse_scenario reads keys, lists and comments") {
    const Scenario s = parse_scenario(R"(
grid.dim = 2
grid.cells = 8, 6   # trailing comment
grid.lengths = 2, 1.5
model.gamma = 0.25
h.family = tanh
stepper.relaxation = 0.8
init.u.profile = step
init.u.low = 0.5
init.u.high = 2
decay.gammas = 1, 3
)");
    CHECK(s.grid.cells == std::vector<int>{8, 6});
    CHECK(s.grid.lengths[1] == 1.5);
    CHECK(s.model.h.family == HFamily::Tanh);
    CHECK(s.stepper.relaxation == 0.8);
    CHECK(s.u0.kind == ProfileKind::Step);
    CHECK(s.decay_gammas == std::vector<double>{1.0, 3.0});
    const Field u = evaluate_profile(s.u0, s.grid.build());
    CHECK(u.min() == 0.5);
    CHECK(u.max() == 2.0);
}

TEST_CASE("parse_scenario errors") {
    try {
        parse_scenario("model.mu = -1\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("mu > 0") != std::string::npos);
    }
    try {
        parse_scenario("run.mode = decay-study\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("gamma > 0") != std::string::npos);
    }
    CHECK_NOTHROW(parse_scenario("run.mode = decay-study\nmodel.gamma = 1\n"));
    CHECK_THROWS_AS(parse_scenario("run.mode = steady-check\nmodel.gamma = 1\n"), ValidationError);
    CHECK(parse_error_line("grid.cells = 4\nmodel.bogus = 1\n") == 2);
    CHECK(parse_error_line("\n\nmodel.mu 3\n") == 3);
    CHECK(parse_error_line("model.mu = 1\nmodel.mu = 2\n") == 2);
    CHECK(parse_error_line("model.mu =\n") == 1);
    CHECK(parse_error_line("model.mu = abc\n") == 1);
    CHECK(parse_error_line("init.n = 2.5\n") == 1);
    CHECK_THROWS_AS(parse_scenario("stepper.dt = 0.3\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("run.output_every = 7\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("grid.dim = 2\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("model.nu = -1\n"), ValidationError);
}

TEST_CASE("overrides apply after the document") {
    const Scenario s = parse_scenario("model.mu = 2\n", {"model.mu=3", "run.mode=steady-check"});
    CHECK(s.model.mu == 3.0);
    CHECK(s.mode == Mode::SteadyCheck);
    CHECK_THROWS_AS(parse_scenario("", {"model.mu"}), ParseError);
    CHECK_THROWS_AS(parse_scenario("", {"nope=1"}), ParseError);
}

TEST_CASE("CSV profiles resolve against the base directory") {
    const fs::path dir = tmp("csv_profile");
    {
        std::ofstream f(dir / "chi.csv");
        for (int k = 0; k <= 4; ++k) f << 0.1 * k << '\n';
    }
    const Scenario s = parse_scenario("grid.cells = 4\ninit.chi.profile = csv\ninit.chi.file = chi.csv\n", {}, dir);
    const Field chi = evaluate_profile(s.chi0, s.grid.build());
    CHECK(chi[3] == doctest::Approx(0.3));
    const Scenario bad = parse_scenario("grid.cells = 5\ninit.chi.profile = csv\ninit.chi.file = chi.csv\n", {}, dir);
    CHECK_THROWS_AS(evaluate_profile(bad.chi0, bad.grid.build()), ValidationError);
}

TEST_CASE("write_timeseries") {
    const fs::path dir = tmp("timeseries");
    const auto g = Grid::line(8, 1.0);
    ModelParams params;
    const State s = construct_steady_state(g, 1.0, 2.0, params.h);
    const std::vector<DiagnosticsRecord> recs{record(s, nullptr, params)};
    write_timeseries(recs, dir / "a.csv");
    const std::string text = slurp(dir / "a.csv");
    std::istringstream in(text);
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == kTimeseriesHeader);
    CHECK_FALSE(std::getline(in, extra));
    CHECK(row.find(",NA,NA,") != std::string::npos);
    CHECK(row.ends_with(",0,NA,0"));
    CHECK_THROWS_AS(write_timeseries({}, dir / "b.csv"), ValidationError);
    CHECK_THROWS_AS(write_timeseries(recs, "/proc/definitely/not/here.csv"), IoError);
}

TEST_CASE("timeseries output is byte-identical across runs") {
    const Scenario s = parse_scenario(kSmall);
    const fs::path a = tmp("det_a"), b = tmp("det_b");
    execute(s, a);
    execute(s, b);
    CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
    CHECK(slurp(a / "snapshot_000010.csv") == slurp(b / "snapshot_000010.csv"));
}

TEST_CASE("snapshot roundtrip is exact") {
    const fs::path dir = tmp("snapshot");
    const Scenario sc = parse_scenario(kSmall, {"grid.dim=2", "grid.cells=5,4", "grid.lengths=1,2"});
    const Trajectory tr = run(sc.initial_state(), 0.05, sc.stepper, sc.model);
    const State& s = tr.final_state;
    write_snapshot(s, dir / "s.csv");
    const State r = read_snapshot(dir / "s.csv", s.grid());
    CHECK(r.t == s.t);
    for (auto [x, y] : {std::pair{&s.e, &r.e}, {&s.theta, &r.theta}, {&s.chi, &r.chi}, {&s.xi, &r.xi},
                        {&s.u, &r.u}, {&s.p, &r.p}})
        CHECK(x->values == y->values);
    CHECK(check_state(r, sc.model.h).passed(1e-10));

    CHECK_THROWS_AS(read_snapshot(dir / "s.csv", Grid::rectangle(5, 4, 1.0, 1.0)), ValidationError);
    CHECK_THROWS_AS(read_snapshot(dir / "s.csv", Grid::line(5, 1.0)), ValidationError);

    const std::string text = slurp(dir / "s.csv");
    {
        std::ofstream cut(dir / "cut.csv", std::ios::binary);
        cut << text.substr(0, text.size() / 2);
        cut.flush();
    }
    try {
        read_snapshot(dir / "cut.csv", s.grid());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() > 2);
    }
    CHECK_THROWS_AS(read_snapshot(dir / "missing.csv", s.grid()), IoError);
}

TEST_CASE("snapshot of a steady state has constant field columns") {
    const fs::path dir = tmp("steady_snapshot");
    const auto g = Grid::line(6, 1.0);
    const State s = construct_steady_state(g, 1.0, 1.0, HSpec{});
    write_snapshot(s, dir / "s.csv");
    std::ifstream in(dir / "s.csv");
    std::string line, first;
    std::getline(in, line);
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        const std::string fields = line.substr(line.find(',') + 1);
        if (rows == 0) first = fields;
        CHECK(fields == first);
        ++rows;
    }
    CHECK(rows == 7);
}

TEST_CASE("execute: every mode writes its outputs") {
    SUBCASE("steady-check") {
        const fs::path dir = tmp("mode_steady");
        const Scenario s = parse_scenario(std::string(kSmall) + "run.mode = steady-check\n");
        const ModeSummary m = execute(s, dir);
        CHECK(fs::exists(dir / "steady.csv"));
        bool has_branch = false;
        for (const auto& [k, v] : m.values) has_branch |= k == "branch";
        CHECK(has_branch);
    }
    SUBCASE("decay-study") {
        const fs::path dir = tmp("mode_decay");
        const Scenario s =
            parse_scenario(std::string(kSmall) + "run.mode = decay-study\nmodel.gamma = 1\ndecay.gammas = 1, 2\n");
        execute(s, dir);
        CHECK(fs::exists(dir / "decay.csv"));
        CHECK(fs::exists(dir / "gamma_1" / "timeseries.csv"));
    }
    SUBCASE("convergence-study") {
        const fs::path dir = tmp("mode_conv");
        const Scenario s = parse_scenario(std::string(kSmall) + "run.mode = convergence-study\n");
        const ModeSummary m = execute(s, dir);
        CHECK(fs::exists(dir / "convergence.csv"));
        CHECK(m.values.size() == 1 + 1 + 2);
    }
}

TEST_CASE("execute: solver failure dumps the last accepted state") {
    const fs::path dir = tmp("failure");
    const Scenario s =
        parse_scenario(std::string(kSmall) + "stepper.max_outer = 1\nstepper.dt_min = 0.01\n");
    try {
        execute(s, dir);
        FAIL("expected ScenarioFailure");
    } catch (const ScenarioFailure& f) {
        CHECK(fs::exists(f.dump_path()));
        CHECK_NOTHROW(read_snapshot(f.dump_path(), s.grid.build()));
    }
}

#ifdef HYDROSTORE_CLI
TEST_CASE("CLI exit codes") {
    const fs::path dir = tmp("cli");
    {
        std::ofstream cfg(dir / "ok.cfg");
        cfg << kSmall;
    }
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "model.mu = -2\n";
    }
    const std::string cli = HYDROSTORE_CLI;
    auto sh = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    const std::string quiet = " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
    CHECK(sh(cli + " --config " + (dir / "ok.cfg").string() + " --out " + (dir / "run").string() + quiet) == 0);
    CHECK(fs::exists(dir / "run" / "timeseries.csv"));
    CHECK(sh(cli + " steady-check --config " + (dir / "ok.cfg").string() + " --out " + (dir / "st").string() +
             quiet) == 0);
    CHECK(fs::exists(dir / "st" / "steady.csv"));
    CHECK(sh(cli + " --config " + (dir / "bad.cfg").string() + quiet) == 2);
    CHECK(slurp(dir / "stderr.txt").find("mu > 0") != std::string::npos);
    CHECK(sh(cli + " --config " + (dir / "ok.cfg").string() + " --override model.nope=1" + quiet) == 2);
    CHECK(sh(cli + " --config " + (dir / "ok.cfg").string() + " --mode decay-study" + quiet) == 2);
    CHECK(sh(cli + " --config " + (dir / "ok.cfg").string() + " --out " + (dir / "fail").string() +
             " --override stepper.max_outer=1 --override stepper.dt_min=0.01" + quiet) == 3);
    CHECK(slurp(dir / "stderr.txt").find("failure_dump.csv") != std::string::npos);
    CHECK(sh(cli + " --config " + (fs::path(HYDROSTORE_SCENARIO_DIR) / "steady_1d.cfg").string() + " --out " +
             (dir / "preset").string() + quiet) == 0);
}
#endif
