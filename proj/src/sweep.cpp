#include "orgsim/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orgsim/errors.hpp"
#include "orgsim/scenario.hpp"

namespace orgsim {

SweepSpec load_sweep_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sweep spec '" + path + "'");
    const std::string dir = std::filesystem::path(path).parent_path().string();

    SweepSpec spec;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::istringstream ss(raw);
        std::string key;
        if (!(ss >> key) || key[0] == '#') continue;
        std::string value;
        if (!(ss >> value))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": missing value for '" +
                              key + "'");
        if (key == "scenario") {
            spec.scenario_path =
                (value.front() == '/' || dir.empty()) ? value : dir + "/" + value;
        } else if (key == "nodes") {
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) {
                try {
                    spec.nodes.push_back(static_cast<std::uint32_t>(std::stoul(item)));
                } catch (const std::exception&) {
                    throw ConfigError(path + ":" + std::to_string(lineno) +
                                      ": bad node count '" + item + "'");
                }
            }
        } else if (key == "seeds") {
            try {
                spec.seeds = static_cast<std::uint32_t>(std::stoul(value));
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": bad seeds value '" +
                                  value + "'");
            }
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        }
    }

    if (spec.scenario_path.empty()) throw ConfigError(path + ": missing 'scenario' entry");
    if (spec.nodes.empty()) throw ConfigError(path + ": 'nodes' list must be non-empty");
    for (std::uint32_t n : spec.nodes)
        if (n < 1) throw ConfigError(path + ": node counts must be >= 1");
    if (spec.seeds < 1) throw ConfigError(path + ": 'seeds' must be >= 1");
    return spec;
}

SweepResult run_sweep(const SweepSpec& spec) {
    const Scenario base = load_scenario_file(spec.scenario_path);

    std::vector<std::string> subjects;
    for (const auto& a : base.config.assignment) subjects.push_back(a.subject);

    SweepResult result;
    for (const std::uint32_t n : spec.nodes) {
        std::vector<Tick> times;
        for (std::uint32_t s = 0; s < spec.seeds; ++s) {
            SimConfig cfg = base.config;
            cfg.seed = base.config.seed + s;
            cfg.population = n * static_cast<std::uint32_t>(subjects.size());
            cfg.assignment.clear();
            for (const auto& subject : subjects) cfg.assignment.push_back({subject, n});

            World world(cfg, base.tree, base.catalog);
            world.run();
            for (const auto& subject : subjects) {
                const auto it = world.metrics().primary_events.find(subject);
                if (it == world.metrics().primary_events.end() || it->second.empty())
                    continue;  // never formed; leave the point out rather than fake it
                const Tick t = world.metrics().time_to_form(subject);
                result.rows.push_back({n, cfg.seed, subject, t});
                times.push_back(t);
            }
        }
        if (!times.empty()) {
            std::sort(times.begin(), times.end());
            const std::size_t m = times.size();
            const double median =
                (m % 2) ? static_cast<double>(times[m / 2])
                        : (static_cast<double>(times[m / 2 - 1]) + times[m / 2]) / 2.0;
            result.medians.emplace_back(n, median);
        }
    }
    return result;
}

void export_sweep_csv(const SweepResult& result, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

    {
        const std::string path = dir + "/sweep.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write '" + path + "'");
        f << "n_nodes,seed,subject,time_to_form_ticks\n";
        for (const auto& r : result.rows)
            f << r.n_nodes << ',' << r.seed << ',' << r.subject << ',' << r.time_to_form
              << '\n';
    }
    {
        const std::string path = dir + "/sweep_medians.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write '" + path + "'");
        f << "n_nodes,median_time_to_form_ticks\n";
        char buf[32];
        for (const auto& [n, median] : result.medians) {
            std::snprintf(buf, sizeof buf, "%.1f", median);
            f << n << ',' << buf << '\n';
        }
    }
}

}  // namespace orgsim
