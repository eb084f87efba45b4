#include "hydrostore/driver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hydrostore/output.hpp"

namespace hydrostore {

namespace {

std::string snapshot_name(long step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%06ld.csv", step);
    return buf;
}

double mean(const Field& f) { return integrate(f) / f.grid->measure(); }

// Weighted L2 distance restricted to the nodes shared with a coarser grid.
double coarse_distance(const State& coarse, const State& fine) {
    const Grid& gc = *coarse.grid();
    const Grid& gf = *fine.grid();
    const int rx = gf.cells(0) / gc.cells(0);
    const int ry = gc.dim() == 2 ? gf.cells(1) / gc.cells(1) : 1;
    double acc = 0.0;
    const int ny = gc.dim() == 2 ? gc.cells(1) : 0;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= gc.cells(0); ++i) {
            const Index kc = gc.node(i, j);
            const Index kf = gf.node(i * rx, j * ry);
            const double d = std::pow(coarse.chi[kc] - fine.chi[kf], 2) +
                             std::pow(coarse.theta[kc] - fine.theta[kf], 2) +
                             std::pow(coarse.u[kc] - fine.u[kf], 2);
            acc += gc.weights()[kc] * d;
        }
    }
    return std::sqrt(acc);
}

OrderStudy finish_orders(OrderStudy study) {
    for (std::size_t l = 0; l + 1 < study.differences.size(); ++l)
        study.orders.push_back(std::log2(study.differences[l] / study.differences[l + 1]));
    return study;
}

ModeSummary run_and_write(const Scenario& sc, const std::filesystem::path& out_dir, MonitoredRun* keep) {
    ModeSummary summary;
    const State initial = sc.initial_state();
    Monitor monitor(sc.model);
    monitor.start(initial);

    long step = 0;
    State last_accepted = initial;
    RunOptions opts;
    opts.output_every = sc.output_every;
    opts.on_step = [&](const State& prev, const State& next, const StepReport& report) {
        monitor.observe(prev, next, report);
        ++step;
        last_accepted = next;
        if (step % sc.output_every == 0) write_snapshot(next, out_dir / snapshot_name(step));
    };

    write_snapshot(initial, out_dir / snapshot_name(0));
    Trajectory traj;
    try {
        traj = run(initial, sc.t_end, sc.stepper, sc.model, opts);
    } catch (const Error& err) {
        const auto dump = out_dir / "failure_dump.csv";
        write_snapshot(last_accepted, dump);
        write_timeseries(monitor.records(), out_dir / "timeseries.csv");
        throw ScenarioFailure(err.what(), dump);
    }

    const auto ts = out_dir / "timeseries.csv";
    write_timeseries(monitor.records(), ts);
    summary.files.push_back(ts);
    summary.values.emplace_back("steps", std::to_string(traj.steps));
    summary.values.emplace_back("t_final", format_double(traj.final_state.t));
    const auto& last = monitor.records().back();
    summary.values.emplace_back("mass_final", format_double(last.mass));
    summary.values.emplace_back("energy_final", format_double(last.energy));
    summary.values.emplace_back("min_chi", format_double(traj.final_state.chi.min()));
    summary.values.emplace_back("max_chi", format_double(traj.final_state.chi.max()));
    summary.values.emplace_back("min_theta", format_double(traj.final_state.theta.min()));
    if (keep) {
        keep->trajectory = std::move(traj);
        keep->records = monitor.records();
    }
    return summary;
}

void write_key_values(const ModeSummary& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "key,value\n";
    for (const auto& [k, v] : s.values) out << k << ',' << v << '\n';
}

ModeSummary steady_check(const Scenario& sc, const std::filesystem::path& out_dir) {
    MonitoredRun mr;
    ModeSummary summary = run_and_write(sc, out_dir, &mr);
    const State& fin = mr.trajectory.final_state;
    const double theta = mean(fin.theta);
    const double p = mean(fin.p);
    const SteadyBranch branch = classify_steady(theta, p, sc.model.h, sc.steady_deadband);
    const double drive = h_eval(theta, 0, sc.model.h) - std::log(p);

    State ideal = construct_steady_state(fin.grid(), theta, p, sc.model.h, std::clamp(mean(fin.chi), 0.0, 1.0),
                                         sc.steady_deadband);
    ideal.t = fin.t;
    const StepResult again = Stepper(fin.grid(), sc.model, sc.stepper).step(ideal);

    summary.values.emplace_back("mean_theta", format_double(theta));
    summary.values.emplace_back("mean_p", format_double(p));
    summary.values.emplace_back("drive", format_double(drive));
    summary.values.emplace_back("branch", to_string(branch));
    summary.values.emplace_back("final_steady_residual", format_double(steady_residual(fin, sc.model)));
    summary.values.emplace_back("ideal_steady_residual", format_double(steady_residual(ideal, sc.model)));
    summary.values.emplace_back("ideal_fixed_point_deviation", format_double(state_distance(ideal, again.state)));
    const auto path = out_dir / "steady.csv";
    write_key_values(summary, path);
    summary.files.push_back(path);
    return summary;
}

ModeSummary decay_study(const Scenario& sc, const std::filesystem::path& out_dir) {
    ModeSummary summary;
    const auto table_path = out_dir / "decay.csv";
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < sc.decay_gammas.size(); ++i) {
        Scenario run_sc = sc;
        run_sc.model.gamma = sc.decay_gammas[i];
        const auto sub = out_dir / ("gamma_" + std::to_string(i));
        MonitoredRun mr;
        run_and_write(run_sc, sub, &mr);

        std::vector<std::pair<double, double>> series;
        double max_dissip = -INFINITY;
        for (const auto& r : mr.records) {
            series.emplace_back(r.t, *r.phi1);
            max_dissip = std::max(max_dissip, r.dissipation_residual.value_or(0.0));
        }
        const DecayFit fit = fit_decay_rate(series);
        const double v0 = std::sqrt(2.0 * series.front().second);
        const double v1 = std::sqrt(2.0 * series.back().second);
        rows.push_back(format_double(run_sc.model.gamma) + ',' + format_double(fit.alpha) + ',' +
                       format_double(fit.r2) + ',' + format_double(v0) + ',' + format_double(v1) + ',' +
                       format_double(max_dissip));
        summary.values.emplace_back("alpha[gamma=" + format_double(run_sc.model.gamma) + "]",
                                    format_double(fit.alpha));
        summary.files.push_back(sub / "timeseries.csv");
    }
    std::ofstream out(table_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + table_path.string() + " for writing");
    out << "gamma,alpha,r2,dual_norm_initial,dual_norm_final,max_dissip_res\n";
    for (const auto& r : rows) out << r << '\n';
    summary.files.push_back(table_path);
    return summary;
}

ModeSummary convergence_study(const Scenario& sc, const std::filesystem::path& out_dir) {
    ModeSummary summary;
    const OrderStudy time = temporal_order_study(sc, sc.convergence_levels);
    const OrderStudy space = spatial_order_study(sc, sc.convergence_levels);
    const std::vector<double> nu_dist = nu_sweep_distances(sc, sc.convergence_nus);

    const auto path = out_dir / "convergence.csv";
    std::filesystem::create_directories(out_dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "study,level,parameter,difference,order\n";
    auto emit = [&](const char* kind, const OrderStudy& st) {
        for (std::size_t l = 0; l < st.differences.size(); ++l) {
            out << kind << ',' << l << ',' << format_double(st.parameters[l]) << ','
                << format_double(st.differences[l]) << ','
                << (l < st.orders.size() ? format_double(st.orders[l]) : "NA") << '\n';
        }
    };
    emit("time", time);
    emit("space", space);
    for (std::size_t l = 0; l < nu_dist.size(); ++l) {
        out << "nu," << l << ',' << format_double(sc.convergence_nus[l]) << ',' << format_double(nu_dist[l])
            << ",NA\n";
    }
    for (std::size_t l = 0; l < time.orders.size(); ++l)
        summary.values.emplace_back("time_order[" + std::to_string(l) + "]", format_double(time.orders[l]));
    for (std::size_t l = 0; l < space.orders.size(); ++l)
        summary.values.emplace_back("space_order[" + std::to_string(l) + "]", format_double(space.orders[l]));
    for (std::size_t l = 0; l < nu_dist.size(); ++l)
        summary.values.emplace_back("nu_distance[" + std::to_string(l) + "]", format_double(nu_dist[l]));
    summary.files.push_back(path);
    return summary;
}

}  // namespace

MonitoredRun run_monitored(const Scenario& sc, int output_every) {
    MonitoredRun mr;
    const State initial = sc.initial_state();
    Monitor monitor(sc.model);
    monitor.start(initial);
    RunOptions opts;
    opts.output_every = output_every;
    opts.on_step = [&](const State& prev, const State& next, const StepReport& report) {
        monitor.observe(prev, next, report);
    };
    mr.trajectory = run(initial, sc.t_end, sc.stepper, sc.model, opts);
    mr.records = monitor.records();
    return mr;
}

double state_distance(const State& a, const State& b) {
    const Vector& w = a.grid()->weights();
    const Vector d2 = (a.chi.values - b.chi.values).cwiseAbs2() + (a.theta.values - b.theta.values).cwiseAbs2() +
                      (a.u.values - b.u.values).cwiseAbs2();
    return std::sqrt(w.dot(d2));
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
    if (a.outputs.size() != b.outputs.size())
        throw ValidationError("trajectory_distance: trajectories have different lengths");
    double acc = 0.0;
    for (std::size_t k = 1; k < a.outputs.size(); ++k) {
        const double dt = a.outputs[k].t - a.outputs[k - 1].t;
        acc += dt * std::pow(state_distance(a.outputs[k], b.outputs[k]), 2);
    }
    return std::sqrt(acc);
}

OrderStudy temporal_order_study(const Scenario& sc, int levels) {
    OrderStudy study;
    std::vector<State> finals;
    for (int l = 0; l < levels; ++l) {
        Scenario s = sc;
        s.stepper.dt = sc.stepper.dt / std::pow(2.0, l);
        s.stepper.dt_min = std::min(sc.stepper.dt_min, s.stepper.dt);
        finals.push_back(run(s.initial_state(), s.t_end, s.stepper, s.model, {1 << 30, {}}).final_state);
        study.parameters.push_back(s.stepper.dt);
    }
    for (int l = 0; l + 1 < levels; ++l)
        study.differences.push_back(state_distance(finals[static_cast<std::size_t>(l)],
                                                   finals[static_cast<std::size_t>(l) + 1]));
    return finish_orders(std::move(study));
}

OrderStudy spatial_order_study(const Scenario& sc, int levels) {
    OrderStudy study;
    std::vector<State> finals;
    for (int l = 0; l < levels; ++l) {
        Scenario s = sc;
        for (auto& c : s.grid.cells) c = sc.grid.cells[&c - s.grid.cells.data()] << l;
        finals.push_back(run(s.initial_state(), s.t_end, s.stepper, s.model, {1 << 30, {}}).final_state);
        study.parameters.push_back(static_cast<double>(s.grid.cells[0]));
    }
    for (int l = 0; l + 1 < levels; ++l)
        study.differences.push_back(coarse_distance(finals[static_cast<std::size_t>(l)],
                                                    finals[static_cast<std::size_t>(l) + 1]));
    return finish_orders(std::move(study));
}

std::vector<double> nu_sweep_distances(const Scenario& sc, const std::vector<double>& nus) {
    std::vector<Trajectory> runs;
    for (double nu : nus) {
        Scenario s = sc;
        s.model.nu = nu;
        runs.push_back(run(s.initial_state(), s.t_end, s.stepper, s.model, {1, {}}));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) out.push_back(trajectory_distance(runs[i], runs[i + 1]));
    return out;
}

ModeSummary execute(const Scenario& sc, const std::filesystem::path& out_dir) {
    validate(sc);
    std::filesystem::create_directories(out_dir);
    switch (sc.mode) {
        case Mode::Run: return run_and_write(sc, out_dir, nullptr);
        case Mode::SteadyCheck: return steady_check(sc, out_dir);
        case Mode::DecayStudy: return decay_study(sc, out_dir);
        case Mode::ConvergenceStudy: return convergence_study(sc, out_dir);
    }
    return {};
}

}  // namespace hydrostore
