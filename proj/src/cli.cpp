#include "orgsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "orgsim/errors.hpp"
#include "orgsim/scenario.hpp"
#include "orgsim/sweep.hpp"
#include "orgsim/verify.hpp"

namespace orgsim {

namespace {

constexpr int kOk = 0;
constexpr int kBadConfig = 1;
constexpr int kRuntime = 2;
constexpr int kMismatch = 3;

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

}  // namespace

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
    return guarded([&] {
        Scenario sc = load_scenario_file(scenario_path);
        if (seed_override) sc.config.seed = *seed_override;
        World world = make_world(std::move(sc));
        world.run();
        world.metrics().export_csv(out_dir);

        const std::string summary_path = out_dir + "/summary.txt";
        std::ofstream f(summary_path, std::ios::binary);
        if (!f) throw IoError("cannot write '" + summary_path + "'");
        for (const auto& [subject, n] : world.metrics().subject_counts) {
            Tick t = -1;
            const auto it = world.metrics().primary_events.find(subject);
            if (it != world.metrics().primary_events.end() && !it->second.empty())
                t = world.metrics().time_to_form(subject);
            f << subject << " n=" << n << " time_to_form=" << t << "\n";
        }
        return kOk;
    });
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir) {
    return guarded([&] {
        const SweepSpec spec = load_sweep_file(spec_path);
        const SweepResult result = run_sweep(spec);
        export_sweep_csv(result, out_dir);
        return kOk;
    });
}

int cmd_verify(const std::string& scenario_path, std::optional<std::uint64_t> seed_override) {
    return guarded([&] {
        const VerifyReport report = verify_scenario_file(scenario_path, seed_override);
        if (!report.ok()) {
            for (const auto& m : report.mismatches) std::cerr << m.describe() << "\n";
            std::cerr << report.mismatches.size() << " mismatch(es)\n";
            return kMismatch;
        }
        std::cout << "verified " << report.nodes_checked << " node(s) in "
                  << report.components_checked << " component(s) across "
                  << report.subjects_checked << " subject(s)\n";
        return kOk;
    });
}

}  // namespace orgsim
