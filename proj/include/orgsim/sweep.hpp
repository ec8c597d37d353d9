#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "orgsim/types.hpp"

namespace orgsim {

/// One axis of the node-count experiment: rerun a base scenario with every
/// subject scaled to n nodes, for each n in `nodes` and `seeds` seeds per
/// point.
struct SweepSpec {
    std::string scenario_path;
    std::vector<std::uint32_t> nodes;
    std::uint32_t seeds = 1;
};

struct SweepRow {
    std::uint32_t n_nodes = 0;
    std::uint64_t seed = 0;
    std::string subject;
    Tick time_to_form = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::pair<std::uint32_t, double>> medians;  // per n, over all rows
};

/// Parses the sweep spec format: `scenario <path>`, `nodes n1,n2,...`,
/// `seeds k`. The scenario path is resolved relative to the spec file.
SweepSpec load_sweep_file(const std::string& path);

/// Runs every (n, seed) point sequentially and deterministically. Seeds are
/// the base scenario's seed plus 0..seeds-1. Subjects that never formed are
/// left out of the rows.
SweepResult run_sweep(const SweepSpec& spec);

/// Writes sweep.csv (n_nodes,seed,time_to_form_ticks) and sweep_medians.csv
/// (n_nodes,median_time_to_form_ticks) into dir.
void export_sweep_csv(const SweepResult& result, const std::string& dir);

}  // namespace orgsim
