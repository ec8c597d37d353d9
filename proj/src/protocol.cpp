#include "orgsim/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "orgsim/errors.hpp"

namespace orgsim {

namespace {

bool parse_sub_key(const std::string& key, NodeId& cp, std::string& topic) {
    const auto slash = key.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= key.size()) return false;
    NodeId v = 0;
    for (std::size_t i = 0; i < slash; ++i) {
        const char c = key[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<NodeId>(c - '0');
    }
    cp = v;
    topic = key.substr(slash + 1);
    return true;
}

bool valid_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

/// Payload comparison for cluster summaries, ignoring the flooding envelope
/// (id and hop). A re-announcement that matches what a node already stored
/// carries no news and is not worth relaying.
bool summary_payload_equal(const ClusterSummary& a, const ClusterSummary& b) {
    return a.cluster_point == b.cluster_point && a.key == b.key && a.density == b.density &&
           a.location.x == b.location.x && a.location.y == b.location.y &&
           a.topic_members == b.topic_members;
}

void require_phase_at_least(const NodeState& state, Phase p, const char* what) {
    if (!state.phase || static_cast<int>(*state.phase) < static_cast<int>(p))
        throw ProtocolOrderError(std::string(what) + " before " + phase_name(p) +
                                 " on node " + std::to_string(state.id));
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Discover: return "Discover";
        case Phase::DensityExchange: return "DensityExchange";
        case Phase::Elect: return "Elect";
        case Phase::Converge: return "Converge";
        case Phase::SubCluster: return "SubCluster";
        case Phase::Steady: return "Steady";
    }
    return "?";
}

double compute_density(const std::map<NodeId, double>& replies, double self_expertise,
                       const DensityParams& params) {
    if (params.total_nodes < 1)
        throw std::invalid_argument("compute_density: total_nodes must be >= 1");
    const double n = static_cast<double>(replies.size()) + 1.0;
    double sum = self_expertise;
    for (const auto& [origin, expertise] : replies) {
        (void)origin;
        sum += expertise;
    }
    return params.alpha * (n / static_cast<double>(params.total_nodes)) +
           params.beta * (sum / n);
}

void SeenSet::insert(MsgId id) {
    if (id < base_) return;
    const std::size_t idx = static_cast<std::size_t>(id - base_);
    if (idx >= bits_.size()) bits_.resize(idx + 1, false);
    bits_[idx] = true;
}

void SeenSet::drop_below(MsgId new_base) {
    if (new_base <= base_) return;
    const std::size_t shift = static_cast<std::size_t>(new_base - base_);
    if (shift >= bits_.size())
        bits_.clear();
    else
        bits_.erase(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(shift));
    base_ = new_base;
}

bool ElectionState::offer(double density, NodeId origin, const Vec2& location) {
    const bool better =
        !has_best || density > best_density || (density == best_density && origin < best_origin);
    if (!better) return false;
    best_density = density;
    best_origin = origin;
    best_location = location;
    has_best = true;
    return true;
}

bool ElectionState::beats(double density, NodeId origin) const {
    return has_best &&
           (best_density > density || (best_density == density && best_origin < origin));
}

std::string sub_key(NodeId cluster_point, const std::string& topic) {
    return std::to_string(cluster_point) + "/" + topic;
}

namespace {

/// Shared election step for both rounds. Returns the messages this node
/// sends in response: a forward of an adopted announcement, or its own
/// best-known value thrown back at a sender telling it something worse.
/// Equal offers are dropped silently; that silence is what lets the
/// re-announcement cascade die out once everyone agrees.
void density_step(NodeState& state, ElectionState& el, const Density& d, int ttl,
                  std::vector<Message>& out) {
    const NodeId previous_best = el.has_best ? el.best_origin : state.id;
    if (el.offer(d.density, d.origin, d.origin_location)) {
        // Follow the new winner if this node was already walking toward the
        // old one (a migration target is left alone).
        if (state.move_target && state.move_target->node == previous_best &&
            state.move_target->sub == (&el == &state.sub)) {
            state.move_target->location = d.origin_location;
            state.move_target->node = d.origin;
        }
        if (d.hop < ttl) {
            Density fwd = d;
            ++fwd.hop;
            out.emplace_back(fwd);
        }
    } else if (el.beats(d.density, d.origin)) {
        out.emplace_back(Density{el.best_origin, el.key, el.best_density, el.best_location,
                                 /*id=*/0, /*hop=*/0});
    }
    // Equal density, equal origin: agreement, stay quiet.
}

void apply_migration(NodeState& state) {
    if (!state.joined_primary || !state.phase ||
        (*state.phase != Phase::SubCluster && *state.phase != Phase::Steady))
        return;
    std::vector<ClusterSummary> all;
    all.reserve(state.summaries.size());
    for (const auto& [cp, s] : state.summaries) {
        (void)cp;
        all.push_back(s);
    }
    const auto target = migration_decision(state, all);
    if (!target) return;
    const ClusterSummary& dest = state.summaries.at(*target);
    state.joined_primary = *target;
    state.joined_sub.reset();
    state.move_target = MoveTarget{dest.location, *target, /*sub=*/false};
}

}  // namespace

TransitionOutput on_message(NodeState& state, const Message& msg, const SubjectCatalog& catalog,
                            const DensityParams& params, int ttl) {
    (void)params;
    TransitionOutput out;
    const MsgId id = message_id(msg);
    if (state.seen.contains(id)) return out;  // duplicate: no state change, no output
    state.seen.insert(id);

    const std::string& key = message_key(msg);
    NodeId key_cp = 0;
    std::string key_topic;
    bool composite = false;
    const SubjectDef* key_subject = catalog.find_subject(key);
    if (!key_subject && parse_sub_key(key, key_cp, key_topic)) {
        key_subject = catalog.subject_of_topic(key_topic);
        composite = key_subject != nullptr;
    }
    if (!key_subject) {
        out.malformed = 1;
        return out;
    }
    // Nodes only carry rounds of their own subject. Traffic for any other
    // subject is noise to this node and stops here, which is also what keeps
    // idle clusters from flooding the whole hall with every refresh.
    const bool relayable = key_subject->id == state.cls.subject;

    if (const auto* req = std::get_if<ExpertiseRequest>(&msg)) {
        const bool mine = key == state.cls.subject || (!state.sub.key.empty() && key == state.sub.key);
        if (mine)
            out.outbound.emplace_back(
                ExpertiseReply{state.id, key, state.cls.expertise, /*id=*/0});
        if (relayable && req->hop < ttl) {
            ExpertiseRequest fwd = *req;
            ++fwd.hop;
            out.outbound.emplace_back(fwd);
        }
        return out;
    }

    if (const auto* rep = std::get_if<ExpertiseReply>(&msg)) {
        if (!valid_unit(rep->expertise)) {
            out.malformed = 1;
            return out;
        }
        if (key == state.cls.subject) {
            state.primary.replies[rep->origin] = rep->expertise;
        } else if (composite && relayable) {
            // A reply into a sub-round this node hosts doubles as membership
            // evidence: it feeds the primary reply set and the topic census.
            if (key_cp == state.id) {
                state.primary.replies[rep->origin] = rep->expertise;
                state.topic_census[key_topic].insert(rep->origin);
            }
            if (!state.sub.key.empty() && key == state.sub.key)
                state.sub.replies[rep->origin] = rep->expertise;
        }
        return out;  // replies are single-hop
    }

    if (const auto* den = std::get_if<Density>(&msg)) {
        if (!std::isfinite(den->density) || den->density < 0.0) {
            out.malformed = 1;
            return out;
        }
        if (key == state.cls.subject)
            density_step(state, state.primary, *den, ttl, out.outbound);
        else if (!state.sub.key.empty() && key == state.sub.key)
            density_step(state, state.sub, *den, ttl, out.outbound);
        else if (relayable && den->hop < ttl) {
            Density fwd = *den;
            ++fwd.hop;
            out.outbound.emplace_back(fwd);  // a sibling sub-round of this subject
        }
        return out;
    }

    const auto& sum = std::get<ClusterSummary>(msg);
    if (!std::isfinite(sum.density) || sum.density < 0.0) {
        out.malformed = 1;
        return out;
    }
    if (!relayable) return out;
    const auto known = state.summaries.find(sum.cluster_point);
    if (known != state.summaries.end() && summary_payload_equal(known->second, sum))
        return out;  // old news travels no further
    state.summaries[sum.cluster_point] = sum;
    apply_migration(state);
    if (sum.hop < ttl) {
        ClusterSummary fwd = sum;
        ++fwd.hop;
        out.outbound.emplace_back(fwd);
    }
    return out;
}

TransitionOutput start_phase(NodeState& state, Phase phase, const DensityParams& params) {
    const int expected = state.phase ? static_cast<int>(*state.phase) + 1 : 0;
    if (static_cast<int>(phase) != expected)
        throw ProtocolOrderError(std::string("start_phase: got ") + phase_name(phase) +
                                 ", expected " +
                                 (expected > static_cast<int>(Phase::Steady)
                                      ? "nothing further"
                                      : phase_name(static_cast<Phase>(expected))) +
                                 " on node " + std::to_string(state.id));
    state.phase = phase;

    TransitionOutput out;
    switch (phase) {
        case Phase::Discover:
            state.primary.key = state.cls.subject;
            out.outbound.emplace_back(
                ExpertiseRequest{state.id, state.cls.subject, /*id=*/0, /*hop=*/0});
            break;
        case Phase::DensityExchange:
            state.primary.own_density =
                compute_density(state.primary.replies, state.cls.expertise, params);
            state.primary.own_ready = true;
            state.primary.offer(state.primary.own_density, state.id, state.location);
            out.outbound.emplace_back(Density{state.id, state.cls.subject,
                                              state.primary.own_density, state.location,
                                              /*id=*/0, /*hop=*/0});
            break;
        case Phase::Elect:
            break;  // the adoption rule in on_message does the electing
        case Phase::Converge:
            if (state.primary.has_best && state.primary.best_density >= params.min_density)
                state.move_target =
                    MoveTarget{state.primary.best_location, state.primary.best_origin, false};
            break;
        case Phase::SubCluster:
        case Phase::Steady:
            break;  // sub stages and refreshes are scheduled separately
    }
    return out;
}

TransitionOutput start_sub_stage(NodeState& state, SubStage stage, const DensityParams& params) {
    require_phase_at_least(state, Phase::SubCluster, "start_sub_stage");
    TransitionOutput out;
    // Nodes that never elected (or were gated out by the quorum threshold)
    // skip the sub round entirely.
    if (!state.primary.has_best || state.primary.best_density < params.min_density) return out;

    switch (stage) {
        case SubStage::Discover: {
            state.sub = ElectionState{};
            state.sub_topic = state.cls.topics.front();
            state.sub.key = sub_key(state.primary.best_origin, state.sub_topic);
            if (state.primary.best_origin == state.id)
                state.topic_census[state.sub_topic].insert(state.id);
            out.outbound.emplace_back(ExpertiseRequest{state.id, state.sub.key, 0, 0});
            break;
        }
        case SubStage::DensityExchange:
            state.sub.own_density = compute_density(state.sub.replies, state.cls.expertise, params);
            state.sub.own_ready = true;
            state.sub.offer(state.sub.own_density, state.id, state.location);
            out.outbound.emplace_back(Density{state.id, state.sub.key, state.sub.own_density,
                                              state.location, 0, 0});
            break;
        case SubStage::Elect:
            break;
        case SubStage::Converge:
            // Walk to the sub-cluster point, but never before reaching the
            // primary cluster itself; stragglers switch over on arrival.
            if (state.joined_primary && state.sub.has_best)
                state.move_target =
                    MoveTarget{state.sub.best_location, state.sub.best_origin, true};
            break;
    }
    state.sub_stage = stage;
    return out;
}

bool is_cluster_point(const NodeState& state) {
    require_phase_at_least(state, Phase::Converge, "is_cluster_point");
    if (!state.primary.has_best)
        throw ProtocolOrderError("is_cluster_point: node " + std::to_string(state.id) +
                                 " has no election result");
    return state.primary.best_origin == state.id;
}

TransitionOutput cluster_point_refresh(NodeState& state, const DensityParams& params) {
    if (!is_cluster_point(state))
        throw ProtocolOrderError("cluster_point_refresh: node " + std::to_string(state.id) +
                                 " is not a cluster point");
    state.primary.own_density =
        compute_density(state.primary.replies, state.cls.expertise, params);
    state.primary.offer(state.primary.own_density, state.id, state.location);

    TransitionOutput out;
    out.outbound.emplace_back(Density{state.id, state.cls.subject, state.primary.best_density,
                                      state.location, 0, 0});
    if (*state.phase >= Phase::SubCluster) {
        ClusterSummary s;
        s.cluster_point = state.id;
        s.key = state.cls.subject;
        s.density = state.primary.best_density;
        s.location = state.location;
        for (const auto& [topic, members] : state.topic_census)
            s.topic_members[topic] = static_cast<std::uint32_t>(members.size());
        out.outbound.emplace_back(std::move(s));
    }
    return out;
}

TransitionOutput member_refresh(const NodeState& state) {
    TransitionOutput out;
    if (!state.phase || *state.phase < Phase::Converge) return out;
    if (!state.primary.has_best || state.primary.best_origin == state.id) return out;
    const std::string key = (state.joined_primary && state.joined_sub)
                                ? sub_key(*state.joined_primary, *state.joined_sub)
                                : state.cls.subject;
    out.outbound.emplace_back(ExpertiseReply{state.id, key, state.cls.expertise, 0});
    return out;
}

std::optional<NodeId> migration_decision(const NodeState& state,
                                         const std::vector<ClusterSummary>& summaries) {
    if (!state.joined_primary) return std::nullopt;
    const NodeId current = *state.joined_primary;
    if (current == state.id) return std::nullopt;  // cluster points stay put

    const ClusterSummary* here = nullptr;
    for (const auto& s : summaries)
        if (s.cluster_point == current) here = &s;
    if (here) {
        for (const auto& topic : state.cls.topics)
            if (here->topic_members.count(topic)) return std::nullopt;
    }

    const std::string& top = state.cls.topics.front();
    std::optional<NodeId> pick;
    for (const auto& s : summaries) {
        if (s.cluster_point == current || s.key != state.cls.subject) continue;
        const auto it = s.topic_members.find(top);
        if (it == s.topic_members.end() || it->second == 0) continue;
        if (!pick || s.cluster_point < *pick) pick = s.cluster_point;
    }
    return pick;
}

}  // namespace orgsim
