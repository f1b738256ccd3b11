#include "bpsim/figures.hpp"
#include "bpsim/junction.hpp"
#include "bpsim/metrics.hpp"
#include "bpsim/policy.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bpsim;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string resolve_outdir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BPSIM_OUTDIR")) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

std::string quote_arg(const std::string& a) {
    if (a.find_first_of(" \t\"") == std::string::npos) return a;
    std::string q = "\"";
    for (char c : a) {
        if (c == '"') q += '\\';
        q += c;
    }
    return q + "\"";
}

// Written alongside every file-producing subcommand; `replay --manifest`
// re-executes the stored command line to regenerate outputs bit-exactly.
void write_manifest(const fs::path& path, const std::string& subcommand,
                    const std::string& command, const json& config,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& outputs) {
    json m;
    m["subcommand"] = subcommand;
    m["command"] = command;
    m["version"] = kVersion;
    m["config"] = config;
    m["seeds"] = seeds;
    m["outputs"] = outputs;
    write_file(path, m.dump(2) + "\n");
}

GammaMode parse_gamma(const std::string& s) {
    if (s == "uniform") return GammaMode::Uniform;
    if (s == "invcap" || s == "inverse-capacity") return GammaMode::InverseCapacity;
    throw std::invalid_argument("unknown gamma mode: " + s + " (uniform|invcap)");
}

const char* region_name(Region r) {
    switch (r) {
        case Region::U1S2: return "u1s2";
        case Region::U2S1: return "u2s1";
        default: return "indeterminate";
    }
}

json junction_report(const JunctionParams& p) {
    p.validate();
    json rep;
    rep["params"] = {{"c", p.c},
                     {"k", p.k},
                     {"eta", p.eta},
                     {"Q", p.Q},
                     {"gamma", p.gamma == GammaMode::Uniform ? "uniform" : "invcap"}};
    RegionLabel label = phase_region(p);
    rep["region"] = region_name(label.region);
    if (label.definite()) {
        rep["unsaturated"] = label.u();
        rep["saturated"] = label.s();
        SteadyStateBounds b = steady_state_bounds(p);
        rep["bounds"] = {{"q_u", {b.q_u_lo, b.q_u_hi}},
                         {"q_s", {b.q_s_lo, b.q_s_hi}},
                         {"q_s_act", b.q_s_act},
                         {"p_act", b.p_act}};
        rep["mean_queue_estimate"] = mean_queue_estimate(p);
        rep["transient_tolerance"] = transient_tolerance(p);
    }
    return rep;
}

// One merge simulation from empty queues; labels via end-of-run saturation.
SaturationWindow simulate_cell(const JunctionParams& p, long horizon) {
    NetworkSpec spec = make_junction_spec(p);
    JunctionIndex ix = junction_index(spec);
    SimOptions opt;
    opt.horizon = horizon;
    opt.record = RecordLevel::Trajectory;
    SimResult res = simulate(spec, Policy::backpressure(WeightMode::Uniform), opt);
    std::vector<double> q1, q2;
    std::vector<std::uint8_t> g1, g2;
    for (const auto& st : res.trajectory->states) {
        q1.push_back(st.q[ix.q1]);
        q2.push_back(st.q[ix.q2]);
    }
    for (const auto& ph : res.trajectory->phases) {
        int green = spec.intersections[ix.merge_intersection].phases[ph[ix.merge_intersection]][0];
        g1.push_back(green == ix.q1);
        g2.push_back(green == ix.q2);
    }
    g1.push_back(0);  // no decision at the horizon; align with the queue series
    g2.push_back(0);
    return classify_saturation(q1, q2, g1, g2, p.c1(), p.c2(), 3 * horizon / 4, horizon);
}

struct PhaseDiagramArgs {
    double c = 10.0, eta = 0.4;
    double k_min = 1.5, k_max = 10.0, q_min = 0.0, q_max = 120.0;
    int resolution = 20;
    long horizon = 2000;
    std::string gamma = "uniform";
    std::string mode = "closed-form";
    std::string outdir;
};

int cmd_phase_diagram(const PhaseDiagramArgs& a, const std::string& command) {
    if (a.k_min > a.k_max || a.q_min > a.q_max)
        throw std::invalid_argument("empty parameter range");
    if (a.k_min <= 1.0) throw std::invalid_argument("k range must stay above 1");
    if (a.resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    const GammaMode gm = parse_gamma(a.gamma);
    const bool simulated = a.mode == "simulated";

    std::ostringstream csv;
    csv.precision(10);
    csv << (simulated ? "k,Q,closed_form,simulated,agree\n" : "k,Q,closed_form\n");
    int definite = 0, agree = 0;
    for (int i = 0; i < a.resolution; ++i) {
        const double k = a.k_min + (a.k_max - a.k_min) * i / (a.resolution - 1);
        for (int j = 0; j < a.resolution; ++j) {
            const double Q = a.q_min + (a.q_max - a.q_min) * j / (a.resolution - 1);
            JunctionParams p{a.c, k, a.eta, Q, gm};
            RegionLabel closed = phase_region(p);
            csv << k << ',' << Q << ',' << region_name(closed.region);
            if (simulated) {
                SaturationWindow w = simulate_cell(p, a.horizon);
                csv << ',' << region_name(w.region);
                if (closed.definite()) {
                    ++definite;
                    const bool ok = w.region == closed.region;
                    agree += ok;
                    csv << ',' << (ok ? 1 : 0);
                } else {
                    csv << ',';
                }
            }
            csv << '\n';
        }
    }

    const fs::path dir = resolve_outdir(a.outdir);
    const fs::path out = dir / "phase_diagram.csv";
    write_file(out, csv.str());
    json cfg = {{"c", a.c},           {"eta", a.eta},   {"k_min", a.k_min},
                {"k_max", a.k_max},   {"q_min", a.q_min}, {"q_max", a.q_max},
                {"resolution", a.resolution}, {"horizon", a.horizon},
                {"gamma", a.gamma},   {"mode", a.mode}};
    write_manifest(dir / "phase_diagram_manifest.json", "phase-diagram", command, cfg, {},
                   {out.string()});

    json summary = {{"cells", a.resolution * a.resolution}, {"output", out.string()}};
    if (simulated) {
        summary["definite_cells"] = definite;
        summary["agreement"] = definite ? static_cast<double>(agree) / definite : 1.0;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct Scenario {
    std::string type;  // "grid" | "junction"
    GridConfig grid;
    double rho = 1.0;
    std::uint64_t seed = 0;
    JunctionParams junction;
    double junction_q1 = 0.0, junction_q2 = 0.0;  // initial queues
    std::optional<DemandProfile> profile;
    std::optional<IncidentSpec> incident;
};

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read scenario file: " + path);
    json j = json::parse(in);
    Scenario sc;
    sc.type = j.at("type").get<std::string>();
    if (sc.type == "grid") {
        const json& g = j.at("grid");
        sc.grid.rows = g.value("rows", 10);
        sc.grid.cols = g.value("cols", 10);
        sc.grid.h = g.value("h", 5);
        sc.grid.capacity_ratio = g.value("capacity_ratio", 4.0);
        sc.grid.base_capacity = g.value("base_capacity", 8.0);
        sc.grid.time_step_seconds = g.value("time_step_seconds", 30.0);
        const json& d = j.at("demand");
        sc.rho = d.value("rho", 1.0);
        sc.seed = d.value("seed", std::uint64_t{0});
    } else if (sc.type == "junction") {
        const json& p = j.at("junction");
        sc.junction.c = p.value("c", 10.0);
        sc.junction.k = p.value("k", 2.0);
        sc.junction.eta = p.value("eta", 0.4);
        sc.junction.Q = p.value("Q", 0.0);
        sc.junction.gamma = parse_gamma(p.value("gamma", std::string("uniform")));
        sc.junction_q1 = p.value("q1", 0.0);
        sc.junction_q2 = p.value("q2", 0.0);
    } else {
        throw std::invalid_argument("unknown scenario type: " + sc.type);
    }
    if (j.contains("profile")) {
        DemandProfile prof;
        prof.breakpoints = j["profile"].at("breakpoints").get<std::vector<long>>();
        prof.scale = j["profile"].at("scale").get<std::vector<double>>();
        sc.profile = prof;
    }
    if (j.contains("incident")) {
        IncidentSpec inc;
        inc.link = j["incident"].at("link").get<std::string>();
        inc.t_start = j["incident"].at("t_start").get<long>();
        inc.t_end = j["incident"].at("t_end").get<long>();
        sc.incident = inc;
    }
    return sc;
}

struct RunArgs {
    std::string scenario;
    std::string policy = "bp";
    long horizon = 500;
    std::uint64_t seed = 42;
    int dwell = 1;
    std::string run_id = "r0";
    std::string gamma_file;  // JSON map movement -> weight for custom gamma
    std::string outdir;
};

std::map<MovementId, double> load_custom_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read weight file: " + path);
    json j = json::parse(in);
    std::map<MovementId, double> weights;
    for (const auto& [key, val] : j.items()) {
        const auto pos = key.find("->");
        if (pos == std::string::npos)
            throw std::invalid_argument("weight key must look like from->to: " + key);
        weights[{key.substr(0, pos), key.substr(pos + 2)}] = val.get<double>();
    }
    return weights;
}

int cmd_run(const RunArgs& a, const std::string& command) {
    Scenario sc = load_scenario(a.scenario);

    NetworkSpec spec;
    std::vector<CapacityOverlay> overlays;
    if (sc.type == "grid") {
        GridNetwork net = load_grid_scenario(sc.grid, sc.rho, sc.seed);
        if (sc.incident) overlays.push_back(inject_incident(net.spec, *sc.incident));
        if (a.policy == "new")
            spec = apply_weight_mode(net.spec, WeightMode::InverseCapacity);
        else
            spec = std::move(net.spec);
    } else {
        if (a.policy == "new")
            throw std::invalid_argument(
                "junction scenarios fix the weights via their gamma field; use policy bp");
        spec = make_junction_spec(sc.junction);
    }

    Policy policy = Policy::backpressure(WeightMode::Uniform);
    if (a.policy == "new")
        policy = Policy::backpressure(WeightMode::InverseCapacity);
    else if (a.policy == "fixed")
        policy = Policy::fixed_cycle(a.dwell);
    else if (a.policy == "alt")
        policy = Policy::alternating();
    else if (a.policy != "bp")
        throw std::invalid_argument("unknown policy: " + a.policy + " (bp|new|fixed|alt)");

    if (!a.gamma_file.empty()) {
        if (a.policy != "bp")
            throw std::invalid_argument("--gamma replaces the uniform weights; use policy bp");
        if (sc.type != "grid")
            throw std::invalid_argument(
                "junction scenarios fix the weights via their gamma field");
        spec = apply_weight_mode(spec, WeightMode::Custom, load_custom_weights(a.gamma_file));
        policy = Policy::backpressure(WeightMode::Custom);
    }

    SimOptions opt;
    opt.horizon = a.horizon;
    opt.seed = a.seed;
    opt.overlays = overlays;
    if (sc.profile) opt.demand = *sc.profile;
    const bool merge_trace = sc.type == "junction" && policy.type == PolicyType::Backpressure;
    if (sc.type == "junction") {
        if (merge_trace) opt.record = RecordLevel::Trajectory;
        if (sc.junction_q1 > 0.0 || sc.junction_q2 > 0.0) {
            JunctionIndex ix = junction_index(spec);
            QueueState init = make_initial_state(spec);
            init.q[ix.q1] = sc.junction_q1;
            init.q[ix.q2] = sc.junction_q2;
            opt.initial = init;
        }
    }
    SimResult res = simulate(spec, policy, opt);

    const fs::path dir = resolve_outdir(a.outdir);
    MetricsSeries ms = metrics_from_result(res);
    const fs::path metrics_path = dir / "metrics.csv";
    write_file(metrics_path, metrics_to_csv(a.run_id, policy.name(), ms, spec));

    std::ostringstream trace;
    trace.precision(10);
    trace << "t,max_priority\n";
    if (merge_trace) {
        // Trace the two competing approaches only: the clamped pass-through
        // carries a constant priority that would hide the merge signal.
        JunctionIndex ix = junction_index(spec);
        const Trajectory& tr = *res.trajectory;
        for (std::size_t t = 0; t < tr.priority.size(); ++t)
            trace << t << ',' << std::max(tr.priority[t][ix.q1], tr.priority[t][ix.q2]) << '\n';
    } else {
        for (std::size_t t = 0; t < res.max_priority.size(); ++t)
            trace << t << ',' << res.max_priority[t] << '\n';
    }
    const fs::path trace_path = dir / "priority_trace.csv";
    write_file(trace_path, trace.str());

    json summary = {{"total_time_spent", total_time_spent(res)},
                    {"total_inflow", res.total_inflow},
                    {"total_served", res.total_served},
                    {"final_total_queue", res.total_queue.back()}};
    const fs::path summary_path = dir / "summary.json";
    write_file(summary_path, summary.dump(2) + "\n");

    json cfg = {{"scenario", a.scenario}, {"policy", a.policy},   {"horizon", a.horizon},
                {"seed", a.seed},         {"dwell", a.dwell},     {"run_id", a.run_id},
                {"gamma", a.gamma_file}};
    write_manifest(dir / "run_manifest.json", "run", command, cfg, {a.seed},
                   {metrics_path.string(), trace_path.string(), summary_path.string()});
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct GenArgs {
    GridConfig grid;
    double rho = 1.0;
    std::uint64_t seed = 42;
    std::string incident_link;
    long incident_start = 0, incident_end = 0;
    double peak = 0.0;  // if > 0, triangular profile up to this scale
    long peak_horizon = 480;
    std::string out = "scenario.json";
};

int cmd_gen_scenario(const GenArgs& a, const std::string& command) {
    build_manhattan(a.grid);  // validate before writing
    json j;
    j["type"] = "grid";
    j["grid"] = {{"rows", a.grid.rows},
                 {"cols", a.grid.cols},
                 {"h", a.grid.h},
                 {"capacity_ratio", a.grid.capacity_ratio},
                 {"base_capacity", a.grid.base_capacity},
                 {"time_step_seconds", a.grid.time_step_seconds}};
    j["demand"] = {{"rho", a.rho}, {"od_mean_scale", 1.0}, {"seed", a.seed}};
    if (a.peak > 0.0) {
        DemandProfile prof = peak_profile(a.peak_horizon, a.peak);
        j["profile"] = {{"breakpoints", prof.breakpoints}, {"scale", prof.scale}};
    }
    if (!a.incident_link.empty()) {
        if (a.incident_start >= a.incident_end)
            throw std::invalid_argument("incident window must satisfy t_start < t_end");
        j["incident"] = {{"link", a.incident_link},
                         {"t_start", a.incident_start},
                         {"t_end", a.incident_end}};
    }
    write_file(a.out, j.dump(2) + "\n");
    const fs::path manifest = fs::path(a.out).parent_path() /
                              (fs::path(a.out).stem().string() + "_manifest.json");
    write_manifest(manifest, "gen-scenario", command, j, {a.seed}, {a.out});
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

int cmd_reproduce(const std::string& figure, const std::string& scale_name,
                  const std::string& outdir, const std::string& command) {
    SweepScale scale = scale_name == "full" ? SweepScale::batch() : SweepScale::desk();
    const fs::path dir = resolve_outdir(outdir);

    std::string filename, csv;
    int n_seeds = scale.n_runs;
    if (figure == "fig4") {
        filename = "fig4_rho_sweep.csv";
        csv = sweep_to_csv(fig4_rho_sweep(scale));
    } else if (figure == "fig5") {
        filename = "fig5_h_sweep.csv";
        csv = sweep_to_csv(fig5_h_sweep(scale));
    } else if (figure == "fig6") {
        filename = "fig6_ratio_sweep.csv";
        csv = sweep_to_csv(fig6_ratio_sweep(scale));
    } else if (figure == "fig7") {
        filename = "fig7_scatter.csv";
        csv = scatter_to_csv(fig7_scatter(scale));
        n_seeds = scale.full ? 30 : 5;
    } else if (figure == "fig8") {
        filename = "fig8_peak.csv";
        csv = peak_to_csv(fig8_peak(scale));
        n_seeds = scale.full ? 10 : 3;
    } else if (figure == "fig9") {
        filename = "fig9_10_incident.csv";
        csv = incident_to_csv(fig9_incident(scale));
        n_seeds = scale.full ? 10 : 3;
    } else {
        throw std::invalid_argument("unknown figure id: " + figure +
                                    " (valid: fig4 fig5 fig6 fig7 fig8 fig9)");
    }

    const fs::path out = dir / filename;
    write_file(out, csv);
    std::vector<std::uint64_t> seeds(n_seeds);
    for (int i = 0; i < n_seeds; ++i) seeds[i] = scale.seed0 + i;
    json cfg = {{"figure", figure},
                {"scale", scale_name},
                {"n_runs", scale.n_runs},
                {"horizon", scale.horizon},
                {"seed0", scale.seed0},
                {"arrival_seed_offset", 1000000}};
    write_manifest(dir / (figure + "_manifest.json"), "reproduce", command, cfg, seeds,
                   {out.string()});
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int run_cli(const std::string& command, bool program_name_included);

int cmd_replay(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot read manifest: " + manifest_path);
    json m = json::parse(in);
    const std::string command = m.at("command").get<std::string>();
    std::cout << "replay: " << command << "\n";
    return run_cli(command, true);  // stored commands start with the program name
}

int run_cli(const std::string& command, bool program_name_included) {
    CLI::App app{"Discrete-time queuing-network simulator for weighted backpressure "
                 "traffic-signal control"};
    app.require_subcommand(0, 1);

    // analyze-junction
    JunctionParams jp;
    std::string gamma = "uniform", junction_out;
    auto* analyze = app.add_subcommand("analyze-junction",
                                       "Closed-form regime report for the 2-to-1 merge");
    analyze->add_option("--c", jp.c, "narrow approach capacity");
    analyze->add_option("--k", jp.k, "wide/narrow capacity ratio");
    analyze->add_option("--eta", jp.eta, "demand-to-capacity ratio");
    analyze->add_option("--Q", jp.Q, "downstream queue level");
    analyze->add_option("--gamma", gamma, "weight mode: uniform|invcap");
    analyze->add_option("--out", junction_out, "also write the report JSON here");

    // phase-diagram
    PhaseDiagramArgs pd;
    auto* diagram = app.add_subcommand("phase-diagram",
                                       "Regime labels over a (k, Q) grid");
    diagram->add_option("--c", pd.c, "narrow approach capacity");
    diagram->add_option("--eta", pd.eta, "demand-to-capacity ratio");
    diagram->add_option("--gamma", pd.gamma, "weight mode: uniform|invcap");
    diagram->add_option("--k-min", pd.k_min, "k range lower end");
    diagram->add_option("--k-max", pd.k_max, "k range upper end");
    diagram->add_option("--q-min", pd.q_min, "Q range lower end");
    diagram->add_option("--q-max", pd.q_max, "Q range upper end");
    diagram->add_option("--resolution", pd.resolution, "cells per axis");
    diagram->add_option("--horizon", pd.horizon, "simulated-mode steps per cell");
    diagram->add_option("--mode", pd.mode, "closed-form|simulated")
        ->check(CLI::IsMember({"closed-form", "simulated"}));
    diagram->add_option("-o,--outdir", pd.outdir, "output directory");

    // gen-scenario
    GenArgs gen;
    auto* genc = app.add_subcommand("gen-scenario", "Write a grid scenario JSON file");
    genc->add_option("--rows", gen.grid.rows, "grid rows");
    genc->add_option("--cols", gen.grid.cols, "grid columns");
    genc->add_option("--spacing", gen.grid.h, "arterial spacing (0 = none)");
    genc->add_option("--capacity-ratio", gen.grid.capacity_ratio, "arterial multiplier");
    genc->add_option("--base-capacity", gen.grid.base_capacity, "secondary link capacity");
    genc->add_option("--rho", gen.rho, "demand magnitude");
    genc->add_option("--seed", gen.seed, "demand seed");
    genc->add_option("--incident-link", gen.incident_link, "blocked link name");
    genc->add_option("--incident-start", gen.incident_start, "incident start step");
    genc->add_option("--incident-end", gen.incident_end, "incident end step (exclusive)");
    genc->add_option("--peak", gen.peak, "triangular profile peak scale (0 = flat)");
    genc->add_option("--peak-horizon", gen.peak_horizon, "profile length in steps");
    genc->add_option("-o,--out", gen.out, "scenario file path");

    // run
    RunArgs run;
    auto* runc = app.add_subcommand("run", "Simulate one scenario file");
    runc->add_option("--scenario", run.scenario, "scenario JSON path")->required();
    runc->add_option("--policy", run.policy, "bp|new|fixed|alt");
    runc->add_option("--horizon", run.horizon, "steps to simulate");
    runc->add_option("--seed", run.seed, "arrival seed");
    runc->add_option("--dwell", run.dwell, "fixed-cycle steps per phase");
    runc->add_option("--gamma", run.gamma_file, "custom weight JSON (movement -> gamma)");
    runc->add_option("--run-id", run.run_id, "label for the metrics rows");
    runc->add_option("-o,--outdir", run.outdir, "output directory");

    // reproduce
    std::string figure, scale_name = "desk", rep_outdir;
    auto* rep = app.add_subcommand("reproduce", "Regenerate one experiment data file");
    rep->add_option("--figure", figure, "fig4|fig5|fig6|fig7|fig8|fig9")->required();
    rep->add_option("--scale", scale_name, "desk|full")
        ->check(CLI::IsMember({"desk", "full"}));
    rep->add_option("-o,--outdir", rep_outdir, "output directory");

    // replay
    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "Re-run the command stored in a manifest");
    replay->add_option("--manifest", manifest_path, "manifest JSON path")->required();

    try {
        app.parse(command, program_name_included);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (analyze->parsed()) {
        jp.gamma = parse_gamma(gamma);
        json rep_json = junction_report(jp);
        std::cout << rep_json.dump(2) << "\n";
        if (!junction_out.empty()) {
            write_file(junction_out, rep_json.dump(2) + "\n");
            const fs::path manifest = fs::path(junction_out).parent_path() /
                                      (fs::path(junction_out).stem().string() +
                                       "_manifest.json");
            write_manifest(manifest, "analyze-junction", command, rep_json["params"], {},
                           {junction_out});
        }
        return 0;
    }
    if (diagram->parsed()) return cmd_phase_diagram(pd, command);
    if (genc->parsed()) return cmd_gen_scenario(gen, command);
    if (runc->parsed()) return cmd_run(run, command);
    if (rep->parsed()) return cmd_reproduce(figure, scale_name, rep_outdir, command);
    if (replay->parsed()) return cmd_replay(manifest_path);
    std::cout << app.help();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string command;
    for (int i = 0; i < argc; ++i) {
        if (i) command += ' ';
        command += quote_arg(argv[i]);
    }
    try {
        return run_cli(command, true);
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"category", "validation"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"category", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 3;
    }
}
