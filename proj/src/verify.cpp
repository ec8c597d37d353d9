#include "orgsim/verify.hpp"

#include <cmath>

#include "orgsim/scenario.hpp"

namespace orgsim {

std::string ElectionMismatch::describe() const {
    return "subject=" + subject + " component=" + std::to_string(component_rep) +
           " node=" + std::to_string(node) + " expected=" + std::to_string(expected) +
           " actual=" + std::to_string(actual) + " (" + what + ")";
}

VerifyReport verify_election(const World& world) {
    const auto& positions = world.initial_positions();
    const auto& nodes = world.nodes();
    const auto& snap = world.metrics().elect_snapshot;
    const double R = world.config().radio_range;
    const double alpha = world.config().density.alpha;
    const double beta = world.config().density.beta;
    const double N = static_cast<double>(world.config().population);

    // Densities recomputed from scratch: n counts the same-subject nodes
    // within radio range (self included), the mean runs over exactly those.
    std::vector<double> density(nodes.size(), 0.0);
    for (NodeId v = 0; v < nodes.size(); ++v) {
        double sum = nodes[v].cls.expertise;
        double n = 1.0;
        for (NodeId w = 0; w < nodes.size(); ++w) {
            if (w == v || nodes[w].cls.subject != nodes[v].cls.subject) continue;
            if (distance(positions[v], positions[w]) <= R) {
                sum += nodes[w].cls.expertise;
                n += 1.0;
            }
        }
        density[v] = alpha * (n / N) + beta * (sum / n);
    }

    VerifyReport report;
    for (const auto& [subject, count] : world.metrics().subject_counts) {
        (void)count;
        ++report.subjects_checked;
        for (const auto& component : world.reachability(subject)) {
            ++report.components_checked;
            NodeId winner = component.front();
            for (NodeId v : component)
                if (density[v] > density[winner] || (density[v] == density[winner] && v < winner))
                    winner = v;

            for (NodeId v : component) {
                ++report.nodes_checked;
                if (std::abs(snap[v].best_density - density[winner]) > 1e-12)
                    report.mismatches.push_back({subject, component.front(), v, winner,
                                                 snap[v].best_origin,
                                                 "election-close density off by more than 1e-12"});
                if (snap[v].best_origin != winner)
                    report.mismatches.push_back({subject, component.front(), v, winner,
                                                 snap[v].best_origin,
                                                 "wrong cluster point at election close"});
                if (nodes[v].primary.best_origin != winner)
                    report.mismatches.push_back({subject, component.front(), v, winner,
                                                 nodes[v].primary.best_origin,
                                                 "wrong cluster point at end of run"});
            }
        }
    }
    return report;
}

VerifyReport verify_scenario_file(const std::string& path,
                                  std::optional<std::uint64_t> seed_override) {
    Scenario sc = load_scenario_file(path);
    if (seed_override) sc.config.seed = *seed_override;
    World world = make_world(std::move(sc));
    world.run();
    return verify_election(world);
}

}  // namespace orgsim
