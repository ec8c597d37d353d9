#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "orgsim/types.hpp"

namespace orgsim {

// Wire messages. `key` is the election scope: a subject id for primary
// clustering, or "<cluster-point-id>/<topic-id>" for sub-cluster rounds.
// Freshly emitted messages carry id 0; the simulator stamps a globally
// unique id before the broadcast goes out. Forwarded copies keep their id.

/// Floods outward asking same-interest nodes to reply with their expertise.
struct ExpertiseRequest {
    NodeId origin = 0;
    std::string key;
    MsgId id = 0;
    int hop = 0;
};

/// Single-hop answer to an ExpertiseRequest; never forwarded.
struct ExpertiseReply {
    NodeId origin = 0;
    std::string key;
    double expertise = 0.0;  // in [0,1]
    MsgId id = 0;
};

/// Candidate announcement for the election: the density weight computed by
/// `origin` plus where to walk if `origin` wins.
struct Density {
    NodeId origin = 0;
    std::string key;
    double density = 0.0;
    Vec2 origin_location;
    MsgId id = 0;
    int hop = 0;
};

/// Periodic advert from an established cluster point, used for migration.
struct ClusterSummary {
    NodeId cluster_point = 0;
    std::string key;  // subject id of the cluster
    std::map<std::string, std::uint32_t> topic_members;
    double density = 0.0;
    Vec2 location;
    MsgId id = 0;
    int hop = 0;
};

using Message = std::variant<ExpertiseRequest, ExpertiseReply, Density, ClusterSummary>;

inline MsgId message_id(const Message& m) {
    return std::visit([](const auto& x) { return x.id; }, m);
}

inline void set_message_id(Message& m, MsgId id) {
    std::visit([id](auto& x) { x.id = id; }, m);
}

inline const std::string& message_key(const Message& m) {
    return std::visit([](const auto& x) -> const std::string& { return x.key; }, m);
}

inline NodeId message_origin(const Message& m) {
    return std::visit(
        [](const auto& x) {
            if constexpr (requires { x.origin; })
                return x.origin;
            else
                return x.cluster_point;
        },
        m);
}

inline const char* message_type_name(const Message& m) {
    struct Namer {
        const char* operator()(const ExpertiseRequest&) const { return "ExpertiseRequest"; }
        const char* operator()(const ExpertiseReply&) const { return "ExpertiseReply"; }
        const char* operator()(const Density&) const { return "Density"; }
        const char* operator()(const ClusterSummary&) const { return "ClusterSummary"; }
    };
    return std::visit(Namer{}, m);
}

}  // namespace orgsim
