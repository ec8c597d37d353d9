#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "orgsim/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"interest-cluster self-organization simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir;
    std::string spec;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run one scenario and export metrics CSVs");
    run->add_option("scenario", scenario, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    auto* run_seed = run->add_option("--seed", seed, "override the scenario's seed");

    auto* sweep = app.add_subcommand("sweep", "run a nodes-per-subject sweep");
    sweep->add_option("spec", spec, "sweep spec file")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "run a scenario and check the election oracle");
    verify->add_option("scenario", scenario, "scenario file")->required();
    auto* verify_seed = verify->add_option("--seed", seed, "override the scenario's seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // help is fine, usage errors are config errors
    }

    if (run->parsed()) {
        std::optional<std::uint64_t> s;
        if (run_seed->count()) s = seed;
        return orgsim::cmd_run(scenario, out_dir, s);
    }
    if (sweep->parsed()) return orgsim::cmd_sweep(spec, out_dir);
    std::optional<std::uint64_t> s;
    if (verify_seed->count()) s = seed;
    return orgsim::cmd_verify(scenario, s);
}
