#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orgsim/message.hpp"
#include "orgsim/taxonomy.hpp"
#include "orgsim/types.hpp"

namespace orgsim {

enum class Phase { Discover = 0, DensityExchange, Elect, Converge, SubCluster, Steady };
enum class SubStage { Discover = 0, DensityExchange, Elect, Converge };

const char* phase_name(Phase p);

struct DensityParams {
    double alpha = 0.5;
    double beta = 0.5;                 // alpha + beta = 1 keeps densities in [0,1]
    std::uint32_t total_nodes = 1;     // N
    double min_density = 0.0;          // optional quorum gate; 0 disables it
};

/// Quorum signal: alpha*(n/N) + beta*(mean expertise over the n nodes
/// including self), with n = |replies| + 1.
double compute_density(const std::map<NodeId, double>& replies, double self_expertise,
                       const DensityParams& params);

/// Duplicate-suppression set over the run's monotonically increasing message
/// ids. Ids below `base` belong to floods that can no longer be in flight and
/// are reported as already seen, which lets the simulator expire old
/// generations without per-id bookkeeping.
class SeenSet {
public:
    bool contains(MsgId id) const {
        return id < base_ || (id - base_ < bits_.size() && bits_[id - base_]);
    }
    void insert(MsgId id);
    void drop_below(MsgId new_base);
    MsgId base() const { return base_; }

private:
    MsgId base_ = 1;
    std::vector<bool> bits_;
};

/// One election round's bookkeeping (used for the subject round and again for
/// the per-topic sub-round). Candidates are ordered by (density, -id): higher
/// density wins, ties go to the smaller origin id.
struct ElectionState {
    std::string key;
    std::map<NodeId, double> replies;  // origin -> expertise
    double own_density = 0.0;
    bool own_ready = false;
    double best_density = 0.0;
    NodeId best_origin = 0;
    Vec2 best_location;
    bool has_best = false;

    /// Adopts the offered candidate if it beats the current best; returns
    /// whether it was adopted.
    bool offer(double density, NodeId origin, const Vec2& location);
    /// True if the offer is strictly beaten by the current best.
    bool beats(double density, NodeId origin) const;
};

struct MoveTarget {
    Vec2 location;
    NodeId node = 0;
    bool sub = false;  // targeting a sub-cluster point rather than the primary
};

struct NodeState {
    NodeId id = 0;
    Vec2 location;
    Classification cls;
    std::optional<Phase> phase;

    ElectionState primary;
    ElectionState sub;
    std::optional<SubStage> sub_stage;
    std::string sub_topic;  // topic this node used for the sub round

    std::optional<MoveTarget> move_target;
    std::optional<NodeId> joined_primary;
    std::optional<std::string> joined_sub;

    std::map<NodeId, ClusterSummary> summaries;          // latest per cluster point
    std::map<std::string, std::set<NodeId>> topic_census;  // cluster point only

    SeenSet seen;
};

struct TransitionOutput {
    std::vector<Message> outbound;  // fresh emissions carry id 0
    int malformed = 0;              // messages dropped for bad key/value
};

/// Election key for the sub-cluster round within one primary cluster.
std::string sub_key(NodeId cluster_point, const std::string& topic);

/// Handles one delivered message: answers and floods requests of the node's
/// own subject, records replies, runs the max-density adoption rule
/// (re-emitting the best known value against anything worse), relays sibling
/// sub-rounds of the same subject, and records summaries/migrations. Traffic
/// for other subjects is dropped; duplicate ids are dropped idempotently via
/// the seen set.
TransitionOutput on_message(NodeState& state, const Message& msg, const SubjectCatalog& catalog,
                            const DensityParams& params, int ttl);

/// Fires the synchronized phase transition. Phases must advance in declared
/// order starting from Discover; anything else is a ProtocolOrderError.
TransitionOutput start_phase(NodeState& state, Phase phase, const DensityParams& params);

/// Fires one stage of the sub-cluster round (scheduled inside the SubCluster
/// window). Nodes without an elected primary cluster sit the round out.
TransitionOutput start_sub_stage(NodeState& state, SubStage stage, const DensityParams& params);

/// True iff this node won its own election. Meaningless before the election
/// ends, so querying earlier throws ProtocolOrderError.
bool is_cluster_point(const NodeState& state);

/// Periodic cluster-point beacon: recomputes density from the current reply
/// set (which only grows as members refresh) and re-announces it, plus a
/// ClusterSummary once the sub-cluster window has begun. Throws
/// ProtocolOrderError on a non-cluster-point.
TransitionOutput cluster_point_refresh(NodeState& state, const DensityParams& params);

/// Periodic member beacon keeping the cluster point's reply set warm. Silent
/// unless the node has converged on someone else's cluster.
TransitionOutput member_refresh(const NodeState& state);

/// Picks a better-fitting cluster, if any: only when the current cluster
/// advertises none of the node's topics and some same-subject cluster
/// advertises the node's top topic (ties by smaller cluster point id).
std::optional<NodeId> migration_decision(const NodeState& state,
                                         const std::vector<ClusterSummary>& summaries);

}  // namespace orgsim
