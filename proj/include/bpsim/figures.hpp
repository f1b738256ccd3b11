#pragma once

#include "bpsim/grid.hpp"
#include "bpsim/metrics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bpsim {

// Batch sizes for the experiment sweeps: desk keeps every figure under a few
// minutes on one core; full runs the 300-simulation batches on the larger
// scenario grids.
struct SweepScale {
    int n_runs = 30;
    long horizon = 500;
    std::uint64_t seed0 = 42;
    bool full = false;
    static SweepScale desk() { return {}; }
    static SweepScale batch() { return {300, 500, 42, true}; }
};

// Build a grid, draw one OD matrix, assign shortest paths and normalize the
// demand so the most loaded movement runs at utilization rho/4.
GridNetwork load_grid_scenario(const GridConfig& cfg, double rho, std::uint64_t seed);

// One paired classical-vs-proposed measurement: both policies replay the
// same Poisson arrivals on the same loaded grid.
struct SweepPoint {
    double x = 0.0;  // swept parameter value
    double ratio_mean = 0.0;
    double ratio_sd = 0.0;
    double classical_mean = 0.0;
    double proposed_mean = 0.0;
};
struct SweepTable {
    std::string x_name;
    std::vector<SweepPoint> points;
};

// Demand sweep on the default grid; heterogeneity (arterial spacing) sweep;
// capacity-ratio sweep.
SweepTable fig4_rho_sweep(const SweepScale& scale = SweepScale::desk());
SweepTable fig5_h_sweep(const SweepScale& scale = SweepScale::desk());
SweepTable fig6_ratio_sweep(const SweepScale& scale = SweepScale::desk());

// Per-movement mean-queue comparison on the default heterogeneous grid.
struct ScatterRow {
    std::string movement;
    std::string road_class;  // "arterial" | "secondary"
    double mean_proposed = 0.0;
    double mean_classical = 0.0;
    double log_ratio = 0.0;
};
struct ScatterTable {
    std::vector<ScatterRow> rows;
    int excluded = 0;
    double median_secondary = 0.0;
    double median_arterial = 0.0;
};
ScatterTable fig7_scatter(const SweepScale& scale = SweepScale::desk());

// Triangular-demand peak: cumulative time spent per policy over time.
struct PeakSeries {
    std::vector<double> rho;  // demand scale per step
    // policy -> cumulative time spent, one entry per recorded step.
    std::map<std::string, std::vector<double>> cumulative;
};
PeakSeries fig8_peak(const SweepScale& scale = SweepScale::desk());

// Blocked-link scenario: queue maxima by hop distance and the vicinity
// queue-size series, for both backpressure variants and a fixed cycle.
struct IncidentReport {
    long t_start = 0, t_end = 0;
    std::string link;
    // policy -> group (d0/up1/up2/down1) -> max queue, averaged over seeds.
    std::map<std::string, std::map<std::string, double>> max_by_group;
    // policy -> total queue over the incident vicinity per step.
    std::map<std::string, std::vector<double>> vicinity;
    // policy -> cumulative network time spent at end of horizon.
    std::map<std::string, double> end_cumulative;
};
IncidentReport fig9_incident(const SweepScale& scale = SweepScale::desk());

// Plot-ready CSV renderings.
std::string sweep_to_csv(const SweepTable& table);
std::string scatter_to_csv(const ScatterTable& table);
std::string peak_to_csv(const PeakSeries& series);
std::string incident_to_csv(const IncidentReport& report);

}  // namespace bpsim
