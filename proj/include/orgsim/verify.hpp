#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orgsim/netsim.hpp"

namespace orgsim {

struct ElectionMismatch {
    std::string subject;
    NodeId component_rep = 0;  // smallest member id of the component
    NodeId node = 0;           // the disagreeing member
    NodeId expected = 0;
    NodeId actual = 0;
    std::string what;          // which check failed

    std::string describe() const;
};

struct VerifyReport {
    int subjects_checked = 0;
    int components_checked = 0;
    int nodes_checked = 0;
    std::vector<ElectionMismatch> mismatches;

    bool ok() const { return mismatches.empty(); }
};

/// Checks the finished run's election against a brute-force recomputation
/// from first principles: per subject, per reachability component (on the
/// initial geometry, where elections happen), the winner must be the
/// component's maximum-density node with ties to the smaller id, every
/// member must have believed exactly that when the election window closed,
/// and must still believe it at the end of the run.
VerifyReport verify_election(const World& world);

/// Loads, runs, and verifies a scenario in one go.
VerifyReport verify_scenario_file(const std::string& path,
                                  std::optional<std::uint64_t> seed_override);

}  // namespace orgsim
