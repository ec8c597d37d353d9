#include "orgsim/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include "orgsim/errors.hpp"

namespace orgsim {

Tick PhaseSchedule::duration_of(Phase p) const {
    switch (p) {
        case Phase::Discover: return discover;
        case Phase::DensityExchange: return density_exchange;
        case Phase::Elect: return elect;
        case Phase::Converge: return converge;
        case Phase::SubCluster: return subcluster;
        case Phase::Steady: return steady;
    }
    return 0;
}

Tick PhaseSchedule::start_of(Phase p) const {
    Tick t = 0;
    for (int i = 0; i < static_cast<int>(p); ++i) t += duration_of(static_cast<Phase>(i));
    return t;
}

void validate_config(const SimConfig& cfg, const SubjectCatalog& catalog) {
    if (cfg.population < 1) throw ConfigError("population must be >= 1");
    if (!(cfg.hall_width > 0.0) || !(cfg.hall_height > 0.0))
        throw ConfigError("hall dimensions must be positive");
    if (!(cfg.radio_range > 0.0)) throw ConfigError("radio_range must be positive");
    if (!(cfg.walk_speed > 0.0)) throw ConfigError("walk_speed must be positive");
    if (!(cfg.tick_seconds > 0.0)) throw ConfigError("tick_seconds must be positive");
    if (!(cfg.arrival_radius > 0.0) || !(cfg.arrival_radius < cfg.radio_range))
        throw ConfigError("arrival_radius must be positive and smaller than radio_range");
    if (cfg.ttl < 1) throw ConfigError("ttl must be >= 1");
    if (!(cfg.density.alpha >= 0.0) || !(cfg.density.beta >= 0.0) ||
        std::abs(cfg.density.alpha + cfg.density.beta - 1.0) > 1e-9)
        throw ConfigError("alpha and beta must be non-negative and sum to 1");
    if (!(cfg.density.min_density >= 0.0) || !(cfg.density.min_density <= 1.0))
        throw ConfigError("min_density must lie in [0,1]");
    for (Phase p : {Phase::Discover, Phase::DensityExchange, Phase::Elect, Phase::Converge,
                    Phase::SubCluster, Phase::Steady})
        if (cfg.phases.duration_of(p) < 1)
            throw ConfigError(std::string("phase ") + phase_name(p) +
                              " duration must be >= 1 tick");
    if (cfg.phases.subcluster < 4)
        throw ConfigError("phase SubCluster duration must be >= 4 ticks");
    if (cfg.refresh_interval < 1) throw ConfigError("refresh_interval must be >= 1");

    if (cfg.assignment.empty()) throw ConfigError("subject_nodes: no subjects assigned");
    std::uint64_t sum = 0;
    std::string prev;
    for (const auto& a : cfg.assignment) {
        if (!catalog.has_subject(a.subject))
            throw ConfigError("subject_nodes: unknown subject '" + a.subject + "'");
        if (a.subject == prev)
            throw ConfigError("subject_nodes: duplicate subject '" + a.subject + "'");
        if (!prev.empty() && a.subject < prev)
            throw ConfigError("subject_nodes: assignment not sorted");
        if (a.count < 1)
            throw ConfigError("subject_nodes: count for '" + a.subject + "' must be >= 1");
        prev = a.subject;
        sum += a.count;
    }
    if (sum != cfg.population)
        throw ConfigError("subject_nodes: counts sum to " + std::to_string(sum) +
                          ", population is " + std::to_string(cfg.population));
}

namespace {

double canonical_u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string format_value(const Message& m) {
    char buf[40];
    double v = 0.0;
    if (const auto* r = std::get_if<ExpertiseRequest>(&m))
        v = static_cast<double>(r->hop);
    else if (const auto* e = std::get_if<ExpertiseReply>(&m))
        v = e->expertise;
    else if (const auto* d = std::get_if<Density>(&m))
        v = d->density;
    else
        v = std::get<ClusterSummary>(m).density;
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

World::World(SimConfig cfg, ConceptTree tree, SubjectCatalog catalog)
    : cfg_(std::move(cfg)), tree_(std::move(tree)), catalog_(std::move(catalog)) {
    validate_config(cfg_, catalog_);
    cfg_.density.total_nodes = cfg_.population;

    std::mt19937_64 rng(cfg_.seed);
    const std::uint32_t n = cfg_.population;
    nodes_.resize(n);
    profiles_.resize(n);
    initial_positions_.resize(n);
    recorded_primary_.assign(n, false);
    recorded_sub_.assign(n, false);

    // Node ids take subjects in catalog order: assignment entries are sorted
    // and each contributes `count` consecutive ids.
    std::vector<const SubjectDef*> node_subject(n);
    {
        std::uint32_t next = 0;
        for (const auto& a : cfg_.assignment) {
            const SubjectDef* def = catalog_.find_subject(a.subject);
            for (std::uint32_t k = 0; k < a.count; ++k) node_subject[next++] = def;
        }
    }

    for (NodeId id = 0; id < n; ++id) {
        const SubjectDef& subj = *node_subject[id];
        Vec2 pos{canonical_u01(rng) * cfg_.hall_width, canonical_u01(rng) * cfg_.hall_height};

        // Interest pool: the subject's defining concepts plus all of its
        // topics' concepts; each drawn with probability 1/2.
        std::vector<Concept> pool = subj.concepts.members();
        for (const auto& t : subj.topics)
            pool.insert(pool.end(), t.concepts.members().begin(), t.concepts.members().end());
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

        std::vector<Concept> picked;
        for (const auto& c : pool)
            if (canonical_u01(rng) < 0.5) picked.push_back(c);
        if (picked.empty()) picked.push_back(pool.front());

        Profile& prof = profiles_[id];
        prof.node_id = id;
        prof.interests = ConceptSet::of(std::move(picked));

        NodeState& node = nodes_[id];
        node.id = id;
        node.location = pos;
        node.cls = classify(tree_, catalog_, prof);
        initial_positions_[id] = pos;
        ++metrics_.subject_counts[node.cls.subject];
    }

    metrics_.elect_snapshot.resize(n);
    metrics_.window_end = cfg_.phases.total();
    metrics_.converge_end = cfg_.phases.end_of(Phase::Converge);
    metrics_.subcluster_end = cfg_.phases.end_of(Phase::SubCluster);
    metrics_.population = n;
    metrics_.seed = cfg_.seed;
    metrics_.trace_enabled = cfg_.trace;
}

const std::string& World::subject_of_key(const std::string& key) const {
    if (catalog_.has_subject(key)) return key;
    const auto slash = key.find('/');
    if (slash != std::string::npos)
        if (const SubjectDef* s = catalog_.subject_of_topic(key.substr(slash + 1))) return s->id;
    return key;
}

void World::build_grid() {
    const double cell = cfg_.radio_range;
    grid_nx_ = std::max(1, static_cast<int>(std::ceil(cfg_.hall_width / cell)));
    grid_ny_ = std::max(1, static_cast<int>(std::ceil(cfg_.hall_height / cell)));
    grid_cells_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const Vec2& p = nodes_[id].location;
        const int cx = std::min(grid_nx_ - 1, std::max(0, static_cast<int>(p.x / cell)));
        const int cy = std::min(grid_ny_ - 1, std::max(0, static_cast<int>(p.y / cell)));
        grid_cells_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(id);
    }
}

void World::neighbors_of(NodeId node, std::vector<NodeId>& out) const {
    out.clear();
    const Vec2& p = nodes_[node].location;
    const double cell = cfg_.radio_range;
    const int cx = std::min(grid_nx_ - 1, std::max(0, static_cast<int>(p.x / cell)));
    const int cy = std::min(grid_ny_ - 1, std::max(0, static_cast<int>(p.y / cell)));
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = cx + dx;
            const int y = cy + dy;
            if (x < 0 || y < 0 || x >= grid_nx_ || y >= grid_ny_) continue;
            for (NodeId other : grid_cells_[static_cast<std::size_t>(y) * grid_nx_ + x]) {
                if (other == node) continue;
                if (distance(p, nodes_[other].location) <= cfg_.radio_range)
                    out.push_back(other);
            }
        }
    }
    std::sort(out.begin(), out.end());
}

void World::transmit(NodeId sender, Message&& msg) {
    if (message_id(msg) == 0) {
        set_message_id(msg, next_id_++);
        nodes_[sender].seen.insert(message_id(msg));  // never process own echo
    }
    metrics_.count_transmission(clock_, subject_of_key(message_key(msg)),
                                message_type_name(msg));

    static thread_local std::vector<NodeId> nbrs;
    neighbors_of(sender, nbrs);
    metrics_.total_deliveries += nbrs.size();
    if (nbrs.empty()) return;

    auto& arena = arena_[(clock_ + 1) & 1];
    auto& pending = pending_[(clock_ + 1) & 1];
    const auto idx = static_cast<std::uint32_t>(arena.size());
    arena.push_back(std::move(msg));
    for (NodeId r : nbrs) pending.push_back({r, idx});
}

void World::dispatch(NodeId sender, TransitionOutput&& out) {
    metrics_.malformed_dropped += static_cast<std::uint64_t>(out.malformed);
    for (auto& m : out.outbound) transmit(sender, std::move(m));
}

void World::fire_phase(Phase p) {
    for (auto& node : nodes_) dispatch(node.id, start_phase(node, p, cfg_.density));
}

void World::fire_sub_stage(SubStage s) {
    for (auto& node : nodes_) dispatch(node.id, start_sub_stage(node, s, cfg_.density));
}

void World::deliver_due() {
    auto& arena = arena_[clock_ & 1];
    auto& pending = pending_[clock_ & 1];
    std::sort(pending.begin(), pending.end(), [&](const Delivery& a, const Delivery& b) {
        if (a.receiver != b.receiver) return a.receiver < b.receiver;
        const MsgId ia = message_id(arena[a.idx]);
        const MsgId ib = message_id(arena[b.idx]);
        if (ia != ib) return ia < ib;
        return a.idx < b.idx;
    });
    for (const Delivery& d : pending) {
        const Message& msg = arena[d.idx];
        if (cfg_.trace) {
            std::string line = std::to_string(clock_);
            line += ',';
            line += message_type_name(msg);
            line += ',';
            line += std::to_string(message_origin(msg));
            line += ',';
            line += std::to_string(d.receiver);
            line += ',';
            line += subject_of_key(message_key(msg));
            line += ',';
            line += format_value(msg);
            metrics_.trace.push_back(std::move(line));
        }
        dispatch(d.receiver,
                 on_message(nodes_[d.receiver], msg, catalog_, cfg_.density, cfg_.ttl));
    }
    pending.clear();
    arena.clear();
}

void World::emit_refreshes() {
    const Tick total = cfg_.phases.total();
    if (clock_ % cfg_.refresh_interval != 0) return;
    if (clock_ < cfg_.phases.start_of(Phase::Converge)) return;
    // Leave room for the last flood plus one correction cascade to die out
    // inside the window.
    if (clock_ + 2 * (cfg_.ttl + 2) > total) return;
    for (auto& node : nodes_) {
        if (!node.phase || *node.phase < Phase::Converge || !node.primary.has_best) continue;
        if (node.primary.best_origin == node.id &&
            node.primary.best_density >= cfg_.density.min_density)
            dispatch(node.id, cluster_point_refresh(node, cfg_.density));
        else
            dispatch(node.id, member_refresh(node));
    }
}

void World::move_nodes() {
    const double step_max = cfg_.walk_speed * cfg_.tick_seconds;
    for (auto& node : nodes_) {
        if (!node.phase || *node.phase < Phase::Converge) continue;

        // A straggler that reached the primary point after the sub round
        // retargeted everyone else picks up its sub target here.
        if (node.move_target && !node.move_target->sub && node.joined_primary &&
            *node.joined_primary == node.primary.best_origin && node.sub_stage &&
            *node.sub_stage == SubStage::Converge && node.sub.has_best)
            node.move_target = MoveTarget{node.sub.best_location, node.sub.best_origin, true};

        if (!node.move_target) continue;
        const MoveTarget target = *node.move_target;
        double dist = distance(node.location, target.location);
        if (dist > cfg_.arrival_radius) {
            const double step = std::min(step_max, dist - cfg_.arrival_radius);
            node.location.x += (target.location.x - node.location.x) / dist * step;
            node.location.y += (target.location.y - node.location.y) / dist * step;
            dist = distance(node.location, target.location);
        }
        if (dist <= cfg_.arrival_radius + 1e-9) {
            if (target.sub) {
                if (!node.joined_sub) node.joined_sub = node.sub_topic;
                if (!recorded_sub_[node.id]) {
                    recorded_sub_[node.id] = true;
                    metrics_.sub_events[node.cls.subject].push_back(
                        {node.id, node.sub_topic, clock_});
                }
            } else {
                if (!node.joined_primary) node.joined_primary = target.node;
                if (!recorded_primary_[node.id]) {
                    recorded_primary_[node.id] = true;
                    metrics_.primary_events[node.cls.subject].push_back({node.id, clock_});
                }
            }
        }
    }
}

void World::rotate_seen() {
    if (clock_ % (cfg_.ttl + 2) != 0) return;
    for (auto& node : nodes_) node.seen.drop_below(gen_floor_prev_);
    gen_floor_prev_ = gen_floor_last_;
    gen_floor_last_ = next_id_;
}

bool World::drained() const {
    return pending_[0].empty() && pending_[1].empty();
}

void World::step() {
    ++clock_;
    build_grid();

    const Tick t = clock_;
    for (Phase p : {Phase::DensityExchange, Phase::Elect, Phase::Converge, Phase::SubCluster,
                    Phase::Steady})
        if (t == cfg_.phases.start_of(p)) fire_phase(p);

    const Tick sub_start = cfg_.phases.start_of(Phase::SubCluster);
    const Tick quarter = cfg_.phases.subcluster / 4;
    for (int k = 0; k < 4; ++k)
        if (t == sub_start + k * quarter) fire_sub_stage(static_cast<SubStage>(k));

    deliver_due();
    emit_refreshes();
    move_nodes();
    rotate_seen();

    if (t == cfg_.phases.start_of(Phase::Converge)) {
        // The election round is over; freeze what every node believes.
        for (const auto& node : nodes_)
            metrics_.elect_snapshot[node.id] = {
                node.primary.has_best ? node.primary.best_density : 0.0,
                node.primary.has_best ? node.primary.best_origin : node.id};
    }
    if (t == cfg_.phases.total())
        metrics_.in_flight_at_window_end = pending_[(t + 1) & 1].size();
}

void World::run() {
    if (ran_) throw std::logic_error("World::run called twice");
    ran_ = true;

    build_grid();
    fire_phase(Phase::Discover);  // tick 0

    const Tick total = cfg_.phases.total();
    while (clock_ < total || !drained()) {
        step();
        if (clock_ > total + 200000)
            throw std::runtime_error("simulation failed to quiesce after the phase windows");
    }

    for (const auto& node : nodes_) {
        if (!node.joined_primary) continue;
        metrics_.census.push_back({*node.joined_primary, node.cls.subject,
                                   node.joined_sub.value_or(""), node.id});
    }
}

std::vector<std::vector<NodeId>> World::reachability(const std::string& subject) const {
    std::vector<std::string> subjects(nodes_.size());
    for (NodeId id = 0; id < nodes_.size(); ++id) subjects[id] = nodes_[id].cls.subject;
    return same_subject_components(initial_positions_, cfg_.radio_range, subjects, subject);
}

std::vector<std::vector<NodeId>> same_subject_components(
    const std::vector<Vec2>& positions, double radio_range,
    const std::vector<std::string>& node_subjects, const std::string& subject) {
    std::vector<NodeId> members;
    for (std::size_t v = 0; v < positions.size(); ++v)
        if (node_subjects[v] == subject) members.push_back(static_cast<NodeId>(v));

    std::vector<int> comp(members.size(), -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < members.size(); ++s) {
        if (comp[s] != -1) continue;
        const int c = ncomp++;
        std::deque<std::size_t> queue{s};
        comp[s] = c;
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            for (std::size_t w = 0; w < members.size(); ++w)
                if (comp[w] == -1 &&
                    distance(positions[members[v]], positions[members[w]]) <= radio_range) {
                    comp[w] = c;
                    queue.push_back(w);
                }
        }
    }
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(ncomp));
    for (std::size_t i = 0; i < members.size(); ++i)
        out[static_cast<std::size_t>(comp[i])].push_back(members[i]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace orgsim
