#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "orgsim/types.hpp"

namespace orgsim {

/// Everything a finished run reports: per-tick traffic counters, cluster
/// entry events, the final census, and enough config echo to interpret them.
struct MetricsLog {
    struct FormationEvent {
        NodeId node = 0;
        Tick tick = 0;
    };
    struct SubFormationEvent {
        NodeId node = 0;
        std::string topic;
        Tick tick = 0;
    };
    struct CensusRow {
        NodeId cluster_point = 0;
        std::string subject;
        std::string topic;  // empty when the node never sub-clustered
        NodeId member = 0;
    };
    struct ElectSnapshot {
        double best_density = 0.0;
        NodeId best_origin = 0;
    };

    // tick -> subject -> message type -> transmissions
    std::map<Tick, std::map<std::string, std::map<std::string, std::uint64_t>>> traffic;
    std::map<std::string, std::vector<FormationEvent>> primary_events;     // by subject
    std::map<std::string, std::vector<SubFormationEvent>> sub_events;      // by subject
    std::map<std::string, std::uint32_t> subject_counts;                   // classified nodes
    std::vector<CensusRow> census;
    std::vector<ElectSnapshot> elect_snapshot;  // indexed by node id, taken when Elect ends
    std::vector<std::string> trace;             // per-delivery lines, only when enabled

    std::uint64_t total_transmissions = 0;
    std::uint64_t total_deliveries = 0;
    std::uint64_t malformed_dropped = 0;
    Tick window_end = 0;                     // last scheduled phase tick
    Tick converge_end = 0;
    Tick subcluster_end = 0;
    std::size_t in_flight_at_window_end = 0;
    std::uint32_t population = 0;
    std::uint64_t seed = 0;
    bool trace_enabled = false;

    void count_transmission(Tick t, const std::string& subject, const std::string& type);

    /// First-to-last cluster entry span for a subject. Throws NoDataError
    /// when the subject recorded no entries at all.
    Tick time_to_form(const std::string& subject) const;

    /// Density + ClusterSummary transmissions for one subject, binned. Bins
    /// are contiguous from tick 0 through max(window_end, last traffic),
    /// zeros included; an untouched log yields an empty series.
    std::vector<std::pair<Tick, std::uint64_t>> traffic_series(const std::string& subject,
                                                               Tick bin) const;

    /// Writes traffic.csv, formation.csv, census.csv (and trace.csv when
    /// tracing was on) into dir, creating it if needed. Deterministic bytes
    /// for a given log.
    void export_csv(const std::string& dir) const;
};

}  // namespace orgsim
