#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "orgsim/metrics.hpp"
#include "orgsim/protocol.hpp"
#include "orgsim/taxonomy.hpp"
#include "orgsim/types.hpp"

namespace orgsim {

/// Durations (in ticks) of the synchronized protocol phases, in firing order.
struct PhaseSchedule {
    Tick discover = 20;
    Tick density_exchange = 20;
    Tick elect = 40;
    Tick converge = 120;
    Tick subcluster = 120;
    Tick steady = 120;

    Tick start_of(Phase p) const;
    Tick end_of(Phase p) const { return start_of(p) + duration_of(p); }
    Tick duration_of(Phase p) const;
    Tick total() const { return end_of(Phase::Steady); }
};

struct SubjectCount {
    std::string subject;
    std::uint32_t count = 0;
};

struct SimConfig {
    std::uint32_t population = 0;
    double hall_width = 50.0;    // meters
    double hall_height = 50.0;
    double radio_range = 10.0;   // broadcast radius, closed ball
    double walk_speed = 1.0;     // meters per second
    double arrival_radius = 2.0; // "entered the cluster" distance
    double tick_seconds = 1.0;
    int ttl = 16;
    DensityParams density;       // total_nodes is overwritten with population
    PhaseSchedule phases;
    Tick refresh_interval = 30;
    std::uint64_t seed = 1;
    bool trace = false;
    std::vector<SubjectCount> assignment;  // sorted by subject, counts sum to population
};

/// Throws ConfigError naming the offending field.
void validate_config(const SimConfig& cfg, const SubjectCatalog& catalog);

/// The deterministic world: synchronized phase clock, one-tick broadcast
/// delivery within radio range, straight-line walking toward elected targets.
/// Everything a run does is a pure function of (config, taxonomy, catalog).
class World {
public:
    World(SimConfig cfg, ConceptTree tree, SubjectCatalog catalog);

    /// Advances one tick: fires due phase transitions, delivers messages
    /// sent last tick, emits scheduled refreshes, moves nodes, records
    /// arrivals.
    void step();

    /// Fires Discover and steps until the phase windows have elapsed and no
    /// message remains in flight.
    void run();

    Tick clock() const { return clock_; }
    bool drained() const;
    const SimConfig& config() const { return cfg_; }
    const ConceptTree& tree() const { return tree_; }
    const SubjectCatalog& catalog() const { return catalog_; }
    const std::vector<NodeState>& nodes() const { return nodes_; }
    const std::vector<Profile>& profiles() const { return profiles_; }
    const std::vector<Vec2>& initial_positions() const { return initial_positions_; }
    const MetricsLog& metrics() const { return metrics_; }

    /// Same-subject components over the initial geometry. Only nodes of the
    /// subject relay its rounds, so two members belong together exactly when
    /// a chain of in-range members links them.
    std::vector<std::vector<NodeId>> reachability(const std::string& subject) const;

private:
    struct Delivery {
        NodeId receiver = 0;
        std::uint32_t idx = 0;  // into the arena of the same parity
    };

    void fire_phase(Phase p);
    void fire_sub_stage(SubStage s);
    void dispatch(NodeId sender, TransitionOutput&& out);
    void transmit(NodeId sender, Message&& msg);
    void deliver_due();
    void emit_refreshes();
    void move_nodes();
    void rotate_seen();
    void build_grid();
    void neighbors_of(NodeId node, std::vector<NodeId>& out) const;
    const std::string& subject_of_key(const std::string& key) const;

    SimConfig cfg_;
    ConceptTree tree_;
    SubjectCatalog catalog_;
    std::vector<NodeState> nodes_;     // index == node id
    std::vector<Profile> profiles_;
    std::vector<Vec2> initial_positions_;
    MetricsLog metrics_;

    Tick clock_ = 0;
    MsgId next_id_ = 1;
    MsgId gen_floor_last_ = 1;  // first id stamped after the latest rotation
    MsgId gen_floor_prev_ = 1;  // ... after the rotation before that
    std::vector<Message> arena_[2];
    std::vector<Delivery> pending_[2];
    std::vector<bool> recorded_primary_;
    std::vector<bool> recorded_sub_;
    bool ran_ = false;

    // uniform grid over current positions, rebuilt each tick
    int grid_nx_ = 1, grid_ny_ = 1;
    std::vector<std::vector<NodeId>> grid_cells_;
};

/// Connected components of the subject's nodes in the graph whose edges join
/// two nodes of that subject within radio range. Other-subject nodes neither
/// relay nor appear. Components and their members are sorted by id.
std::vector<std::vector<NodeId>> same_subject_components(
    const std::vector<Vec2>& positions, double radio_range,
    const std::vector<std::string>& node_subjects, const std::string& subject);

}  // namespace orgsim
