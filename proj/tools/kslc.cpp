// kslc: command-line driver for the spike-pattern toolkit. Subcommands map
// onto the analysis workflows (steady states, stability sweeps, Hopf curves,
// slow dynamics, the full solver, side-by-side comparison, ramp experiments);
// every run echoes its resolved configuration and stamps outputs with its
// hash so results are reproducible byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "ksl/dynamics.hpp"
#include "ksl/equilibria.hpp"
#include "ksl/greens.hpp"
#include "ksl/io.hpp"
#include "ksl/kernels.hpp"
#include "ksl/model.hpp"
#include "ksl/nlep.hpp"
#include "ksl/pde.hpp"
#include "ksl/smalleig.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace ksl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInstability = 4;

const std::vector<std::string> kModelKeys = {"d1",   "d2",  "chi", "mu",
                                             "ubar", "tau", "N"};

std::vector<std::string> with_model(std::vector<std::string> extra) {
    extra.insert(extra.end(), kModelKeys.begin(), kModelKeys.end());
    return extra;
}

struct Common {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int threads = 1;
};

Config load_config(const Common& c) {
    Config cfg = c.config_path.empty() ? Config::from_string("")
                                       : Config::from_file(c.config_path);
    for (const auto& kv : c.overrides) cfg.override_kv(kv);
    return cfg;
}

void echo_config(const Config& cfg, const Common& c) {
    fs::create_directories(c.out_dir);
    std::ofstream out(fs::path(c.out_dir) / "resolved_config.txt",
                      std::ios::binary);
    out << "# config_hash=" << cfg.hash() << "\n" << cfg.canonical();
    std::cout << "config_hash=" << cfg.hash() << "\n";
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
}

void write_error_json(const Common& c, const std::string& kind,
                      const std::string& message) {
    fs::create_directories(c.out_dir);
    write_json(fs::path(c.out_dir) / "error.json",
               json{{"error", kind}, {"message", message}});
}

int cmd_equilibrium(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(with_model({"locations", "profile_samples", "route"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    const auto route = cfg.get_string("route", "full") == "balance"
                           ? AmplitudeRoute::dominant_balance
                           : AmplitudeRoute::full_equation;
    const auto locations = cfg.get_list("locations");
    const int samples = cfg.get_int("profile_samples", 2001);

    json j;
    j["config_hash"] = cfg.hash();
    std::unique_ptr<SpikeProfile> prof;
    if (locations.empty()) {
        auto eq = solve_symmetric(p, p.N, route);
        prof = std::make_unique<SpikeProfile>(build_profile(eq, p));
        j["v_max0"] = eq.v_max0;
        j["u_max"] = eq.u_max();
        j["s0"] = eq.s0;
        j["C0"] = eq.C0;
        j["a_g"] = eq.a_g;
        j["zeta0"] = eq.zeta0();
        j["residual"] = eq.residual;
        j["locations"] = eq.locations;
        j["v_max"] = std::vector<double>(size_t(p.N), eq.v_max0);
    } else {
        auto qe = solve_quasi(p, locations);
        prof = std::make_unique<SpikeProfile>(build_profile(qe, p));
        j["locations"] = qe.locations;
        j["v_max"] = qe.v_max;
        j["s"] = qe.s;
        j["C"] = qe.C;
        j["zeta_max"] = qe.zeta_max;
        j["residual"] = qe.residual_norm;
    }
    j["global_balance"] = global_balance_residual(*prof, p);
    j["boundary_value"] = prof->v(1.0);
    write_json(fs::path(c.out_dir) / "equilibrium.json", j);

    CsvWriter csv((fs::path(c.out_dir) / "profile.csv").string(), cfg.hash(),
                  {"x", "u", "v"});
    for (int i = 0; i < samples; ++i) {
        const double x = -1.0 + 2.0 * i / (samples - 1);
        double uu, vv;
        prof->uv(x, uu, vv);
        csv.row({x, uu, vv});
    }
    csv.flush();
    return 0;
}

int cmd_stability(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(with_model({"d1_min", "d1_max", "d1_steps"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();

    json j;
    j["config_hash"] = cfg.hash();
    auto adm = classify_d1(p);
    j["d1pN"] = adm.d1pN;
    j["d1Tm"] = adm.d1Tm_list;
    j["in_admissible_set"] = adm.in_admissible_set;
    if (p.N == 1) {
        j["d1cN"] = "unbounded";
        j["d1cN_star"] = "unbounded";
        j["small_eigenvalues"] = "always stable (small)";
        j["note"] = "no finite d1c1";
    } else {
        j["d1cN"] = competition_threshold(p, p.N);
        j["d1cN_star"] = competition_threshold_jacobian(p, p.N);
        auto eq = solve_symmetric(p, p.N);
        j["d1sN"] = small_eigs_explicit(p, eq).d1sN;
    }
    write_json(fs::path(c.out_dir) / "thresholds.json", j);

    // h_j / lambda_j sweep
    const double d1cstar =
        p.N == 1 ? 20.0 * adm.d1pN : competition_threshold_jacobian(p, p.N);
    const double lo = cfg.get_double("d1_min", adm.d1pN * 1.05);
    const double hi = cfg.get_double("d1_max", d1cstar * 0.98);
    const int steps = cfg.get_int("d1_steps", 60);
    std::vector<std::string> cols{"d1"};
    for (int k = 1; k <= p.N; ++k) cols.push_back("h_" + std::to_string(k));
    for (int k = 1; k <= p.N; ++k) cols.push_back("lambda_" + std::to_string(k));
    cols.push_back("stable_small");
    cols.push_back("stable_large");
    CsvWriter csv((fs::path(c.out_dir) / "sweep.csv").string(), cfg.hash(), cols);

    std::vector<std::vector<double>> rows(steps);
    auto work = [&](int i) {
        const double d1 = lo + (hi - lo) * i / std::max(1, steps - 1);
        ModelParams q = p;
        q.d1 = d1;
        q.chi = p.chibar() * d1;
        std::vector<double> row{d1};
        try {
            auto eq = solve_symmetric(q, p.N);
            auto rep = small_eigs_explicit(q, eq);
            bool stable_small = true;
            for (int k = 0; k < p.N; ++k) stable_small &= rep.h(k) > 0.0;
            for (int k = 0; k < p.N; ++k) row.push_back(rep.h(k));
            for (int k = 0; k < p.N; ++k) row.push_back(rep.lambda(k));
            row.push_back(stable_small ? 1.0 : 0.0);
            row.push_back(d1 < d1cstar ? 1.0 : 0.0);
        } catch (const std::exception&) {
            row.assign(1 + 2 * p.N + 2, std::nan(""));
            row[0] = d1;
        }
        rows[i] = std::move(row);
    };
    if (c.threads > 1) {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < c.threads; ++t)
            pool.emplace_back([&] {
                for (int i = next++; i < steps; i = next++) work(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (int i = 0; i < steps; ++i) work(i);
    }
    for (auto& r : rows) csv.row(r);
    csv.flush();
    return 0;
}

int cmd_hopf(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(with_model({"d1_min", "d1_max", "d1_step"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    const double lo = cfg.get_double("d1_min", 0.9);
    const double hi = cfg.get_double("d1_max", 3.0);
    const double step = cfg.get_double("d1_step", 0.05);
    auto curve = hopf_curve(p, lo, hi, step);
    CsvWriter csv((fs::path(c.out_dir) / "hopf.csv").string(), cfg.hash(),
                  {"d1", "tau_c", "lambda_H"});
    for (const auto& h : curve) csv.row({h.d1, h.tau_c, h.lambda_H});
    csv.flush();
    return 0;
}

int cmd_dae(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(with_model({"x0", "t_end", "rel_tol", "sample_dt"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    auto x0 = cfg.get_list("x0");
    if (x0.empty()) throw std::invalid_argument("dae: x0 required");
    IntegrateOptions opt;
    opt.rel_tol = cfg.get_double("rel_tol", 1e-8);
    auto tr = integrate(p, x0, cfg.get_double("t_end", 1000.0), opt);

    std::vector<std::string> cols{"t"};
    for (size_t k = 1; k <= x0.size(); ++k) cols.push_back("x_" + std::to_string(k));
    for (size_t k = 1; k <= x0.size(); ++k)
        cols.push_back("v_max_" + std::to_string(k));
    CsvWriter csv((fs::path(c.out_dir) / "trajectory.csv").string(), cfg.hash(),
                  cols);
    const double sample_dt = cfg.get_double("sample_dt", 0.0);
    auto emit = [&](size_t i) {
        std::vector<double> row{tr.t[i]};
        row.insert(row.end(), tr.x[i].begin(), tr.x[i].end());
        row.insert(row.end(), tr.v_max[i].begin(), tr.v_max[i].end());
        csv.row(row);
    };
    if (sample_dt <= 0.0) {
        for (size_t i = 0; i < tr.t.size(); ++i) emit(i);
    } else {
        size_t i = 0;
        for (double t = 0.0; t <= tr.t.back() + 1e-12; t += sample_dt) {
            while (i + 1 < tr.t.size() && tr.t[i + 1] <= t) ++i;
            emit(i);
        }
    }
    csv.flush();
    return 0;
}

int cmd_pde(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(
        with_model({"n_cells", "t_max", "tol", "seed", "mode"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    auto adm = classify_d1(p);
    if (!adm.in_admissible_set)
        throw std::invalid_argument("pde: resonant or inadmissible d1");
    const int n = cfg.get_int("n_cells", 0);
    auto grid = PDEGrid::make(n > 0 ? n : PDEGrid::default_cells(p));
    PDEState init;
    if (cfg.get_string("seed", "profile") == "flat") {
        init = flat_state(p, grid);
    } else {
        auto eq = solve_symmetric(p, p.N);
        init = state_from_profile(build_profile(eq, p), grid);
    }
    const bool newton = cfg.get_string("mode", "newton") == "newton";
    auto res = newton
                   ? steady_newton(p, grid, std::move(init),
                                   cfg.get_double("tol", 1e-8))
                   : run_to_steady(p, grid, std::move(init),
                                   cfg.get_double("tol", 1e-7),
                                   cfg.get_double("t_max", 400.0));
    auto spikes = detect_spikes(res.state, grid, p);
    json j;
    j["config_hash"] = cfg.hash();
    j["converged"] = res.converged;
    j["residual"] = res.residual;
    j["t"] = res.state.t;
    j["locations"] = spikes.locations;
    j["amplitudes"] = spikes.amplitudes;
    j["u_bdry"] = {spikes.u_left, spikes.u_right};
    j["v_bdry"] = {spikes.v_left, spikes.v_right};
    double vmax = 0.0;
    for (double v : res.state.v) vmax = std::max(vmax, v);
    j["v_max"] = vmax;
    write_json(fs::path(c.out_dir) / "pde.json", j);
    CsvWriter csv((fs::path(c.out_dir) / "state.csv").string(), cfg.hash(),
                  {"x", "u", "v"});
    for (int i = 0; i < grid.n_cells; ++i)
        csv.row({grid.centers[i], res.state.u[i], res.state.v[i]});
    csv.flush();
    if (!res.converged) {
        std::cerr << "pde: no steady state reached (instability?), residual "
                  << res.residual << "\n";
        return kExitInstability;
    }
    return 0;
}

int cmd_compare(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(
        with_model({"x0", "t_end", "n_cells", "sample_dt", "rel_tol"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    auto x0 = cfg.get_list("x0");
    if (x0.empty()) throw std::invalid_argument("compare: x0 required");
    const double t_end = cfg.get_double("t_end", 1000.0);
    const double sample_dt = cfg.get_double("sample_dt", t_end / 200.0);

    IntegrateOptions opt;
    opt.rel_tol = cfg.get_double("rel_tol", 1e-8);
    auto tr = integrate(p, x0, t_end, opt);

    const int n = cfg.get_int("n_cells", 0);
    auto grid = PDEGrid::make(n > 0 ? n : PDEGrid::default_cells(p));
    auto qe = solve_quasi(p, x0);
    PDEState s = state_from_profile(build_profile(qe, p), grid);
    PDESolver solver(p, grid);

    std::vector<std::string> cols{"t"};
    for (size_t k = 1; k <= x0.size(); ++k)
        cols.push_back("x_dae_" + std::to_string(k));
    for (size_t k = 1; k <= x0.size(); ++k)
        cols.push_back("x_pde_" + std::to_string(k));
    cols.push_back("discrepancy");
    CsvWriter csv((fs::path(c.out_dir) / "comparison.csv").string(), cfg.hash(),
                  cols);
    double worst = 0.0;
    for (double t = 0.0; t <= t_end + 1e-9; t += sample_dt) {
        if (t > 0.0) solver.advance(s, sample_dt);
        auto xd = trajectory_at(tr, t);
        auto spikes = detect_spikes(s, grid, p);
        std::vector<double> row{t};
        row.insert(row.end(), xd.begin(), xd.end());
        double disc = std::nan("");
        if (spikes.locations.size() == x0.size()) {
            disc = 0.0;
            for (size_t k = 0; k < x0.size(); ++k)
                disc = std::max(disc, std::abs(spikes.locations[k] - xd[k]));
            for (size_t k = 0; k < x0.size(); ++k)
                row.push_back(spikes.locations[k]);
        } else {
            row.insert(row.end(), x0.size(), std::nan(""));
        }
        row.push_back(disc);
        worst = std::max(worst, disc);
        csv.row(row);
    }
    csv.flush();
    std::cout << "max_discrepancy=" << format_double(worst) << "\n";
    return 0;
}

int cmd_ramp(const Common& c) {
    Config cfg = load_config(c);
    cfg.require_known(with_model({"d1_begin", "d1_end", "t_ramp", "t_end",
                                  "n_cells", "chi_tracks_d1", "perturb",
                                  "stop_after_event"}));
    echo_config(cfg, c);
    ModelParams p = cfg.model_params();
    RampSchedule sched;
    sched.d1_begin = cfg.get_double("d1_begin", p.d1);
    sched.d1_end = cfg.get_double("d1_end", p.d1 * 2.0);
    sched.t_ramp = cfg.get_double("t_ramp", 200.0);
    sched.t_end = cfg.get_double("t_end", sched.t_ramp);
    sched.chi_tracks_d1 = cfg.get_bool("chi_tracks_d1", true);
    sched.stop_after_event = cfg.get_double("stop_after_event", 0.0);

    ModelParams p0 = p;
    p0.d1 = sched.d1_begin;
    p0.chi = p.chibar() * sched.d1_begin;
    const int n = cfg.get_int("n_cells", 0);
    auto grid = PDEGrid::make(n > 0 ? n : PDEGrid::default_cells(p0));
    auto eq = solve_symmetric(p0, p.N);
    PDEState init = state_from_profile(build_profile(eq, p0), grid);
    // seed a controlled asymmetry so symmetry-breaking modes are excited
    const double perturb = cfg.get_double("perturb", 0.01);
    for (int i = 0; i < grid.n_cells; ++i)
        if (grid.centers[i] < eq.locations.front() + 1.0 / p.N)
            init.u[i] *= 1.0 + perturb;

    auto res = ramp_experiment(p0, grid, std::move(init), sched);
    CsvWriter csv((fs::path(c.out_dir) / "events.csv").string(), cfg.hash(),
                  {"t", "d1", "spike_count"});
    for (const auto& e : res.events)
        csv.row({e.t, e.d1, double(e.spike_count)});
    csv.flush();
    json j;
    j["config_hash"] = cfg.hash();
    j["events"] = json::array();
    for (const auto& e : res.events)
        j["events"].push_back({{"t", e.t},
                               {"d1", e.d1},
                               {"spike_count", e.spike_count},
                               {"locations", e.locations}});
    write_json(fs::path(c.out_dir) / "events.json", j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spike steady states, stability thresholds and slow dynamics "
                 "for the 1D chemotaxis-logistic model"};
    app.require_subcommand(1);

    Common common;
    app.add_option("--config", common.config_path, "key=value config file");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--override", common.overrides, "override key=value")
        ->take_all();
    app.add_option("--threads", common.threads, "worker threads for sweeps");

    int (*runner)(const Common&) = nullptr;
    auto add = [&](const char* name, const char* desc, int (*fn)(const Common&)) {
        auto* sub = app.add_subcommand(name, desc);
        sub->fallthrough();  // --config/--out/--override may follow the verb
        sub->callback([&runner, fn] { runner = fn; });
    };
    add("equilibrium", "solve spike equilibria and profiles", cmd_equilibrium);
    add("stability", "threshold table and h_j/lambda_j sweep", cmd_stability);
    add("hopf", "Hopf threshold curve (tau_c, lambda_H)(d1)", cmd_hopf);
    add("dae", "slow spike dynamics trajectory", cmd_dae);
    add("pde", "full solver steady state", cmd_pde);
    add("compare", "DAE vs PDE spike trajectories", cmd_compare);
    add("ramp", "time-varying d1 event log", cmd_ramp);

    CLI11_PARSE(app, argc, argv);
    try {
        return runner(common);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        write_error_json(common, "config", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        write_error_json(common, "solver", e.what());
        return kExitSolver;
    }
}
