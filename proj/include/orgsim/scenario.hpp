#pragma once

#include <string>
#include <utility>
#include <vector>

#include "orgsim/netsim.hpp"

namespace orgsim {

/// A fully loaded run description: config plus the taxonomy and catalog the
/// config's paths pointed at.
struct Scenario {
    SimConfig config;
    ConceptTree tree;
    SubjectCatalog catalog;
};

/// Spreads `population` nodes over subjects: `pinned` entries take their
/// exact counts, the rest goes to `weights` proportionally (largest
/// remainder, ties by subject id). Throws ConfigError when the numbers
/// cannot work out.
std::vector<SubjectCount> resolve_assignment(
    std::uint32_t population, const std::vector<SubjectCount>& pinned,
    const std::vector<std::pair<std::string, double>>& weights);

/// Parses the key-value scenario format (see README). Paths inside the file
/// are resolved relative to the file itself. The result is validated.
Scenario load_scenario_file(const std::string& path);

inline World make_world(Scenario sc) {
    return World(std::move(sc.config), std::move(sc.tree), std::move(sc.catalog));
}

}  // namespace orgsim
