#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "orgsim/errors.hpp"
#include "orgsim/netsim.hpp"
#include "orgsim/verify.hpp"
#include "support/oracles.hpp"

using namespace orgsim;

namespace {

ConceptTree sim_tree() {
    return ConceptTree::from_edges({
        {"all", "fieldA"},
        {"all", "fieldB"},
        {"fieldA", "a_core"},
        {"fieldA", "a_t1c"},
        {"fieldA", "a_t2c"},
        {"fieldB", "b_core"},
        {"fieldB", "b_t1c"},
        {"fieldB", "b_t2c"},
    });
}

SubjectCatalog sim_catalog() {
    SubjectCatalog cat;
    SubjectDef a;
    a.id = "sa";
    a.concepts = ConceptSet::of({"a_core"});
    a.topics = {{"sa1", ConceptSet::of({"a_t1c"})}, {"sa2", ConceptSet::of({"a_t2c"})}};
    SubjectDef b;
    b.id = "sb";
    b.concepts = ConceptSet::of({"b_core"});
    b.topics = {{"sb1", ConceptSet::of({"b_t1c"})}, {"sb2", ConceptSet::of({"b_t2c"})}};
    cat.subjects = {a, b};
    return cat;
}

SimConfig base_config() {
    SimConfig cfg;
    cfg.population = 12;
    cfg.hall_width = 30.0;
    cfg.hall_height = 30.0;
    cfg.radio_range = 45.0;  // covers the whole hall: one component per subject
    cfg.arrival_radius = 2.0;
    cfg.ttl = 16;
    cfg.seed = 3;
    cfg.assignment = {{"sa", 12}};
    return cfg;
}

}  // namespace

TEST_CASE("phase windows abut and cover the whole run") {
    PhaseSchedule s;
    CHECK(s.start_of(Phase::Discover) == 0);
    CHECK(s.start_of(Phase::DensityExchange) == 20);
    CHECK(s.start_of(Phase::Elect) == 40);
    CHECK(s.start_of(Phase::Converge) == 80);
    CHECK(s.start_of(Phase::SubCluster) == 200);
    CHECK(s.start_of(Phase::Steady) == 320);
    CHECK(s.total() == 440);
    for (Phase p : {Phase::Discover, Phase::DensityExchange, Phase::Elect, Phase::Converge,
                    Phase::SubCluster})
        CHECK(s.end_of(p) == s.start_of(static_cast<Phase>(static_cast<int>(p) + 1)));

    PhaseSchedule custom{2, 3, 5, 7, 8, 4};
    CHECK(custom.start_of(Phase::SubCluster) == 17);
    CHECK(custom.total() == 29);
}

TEST_CASE("configurations that cannot be simulated are refused") {
    const SubjectCatalog cat = sim_catalog();
    auto reject = [&](void (*tweak)(SimConfig&), const char* needle) {
        SimConfig cfg = base_config();
        tweak(cfg);
        CHECK_THROWS_WITH_AS(validate_config(cfg, cat), doctest::Contains(needle), ConfigError);
    };

    validate_config(base_config(), cat);  // the baseline itself is fine

    reject([](SimConfig& c) { c.population = 0; }, "population");
    reject([](SimConfig& c) { c.hall_height = 0.0; }, "hall dimensions");
    reject([](SimConfig& c) { c.radio_range = 0.0; }, "radio_range");
    reject([](SimConfig& c) { c.walk_speed = 0.0; }, "walk_speed");
    reject([](SimConfig& c) { c.tick_seconds = -1.0; }, "tick_seconds");
    reject([](SimConfig& c) { c.arrival_radius = 0.0; }, "arrival_radius");
    reject([](SimConfig& c) { c.arrival_radius = c.radio_range; }, "arrival_radius");
    reject([](SimConfig& c) { c.ttl = 0; }, "ttl");
    reject([](SimConfig& c) { c.density.alpha = 0.7; }, "sum to 1");
    reject([](SimConfig& c) { c.density.min_density = 1.5; }, "min_density");
    reject([](SimConfig& c) { c.phases.elect = 0; }, "duration");
    reject([](SimConfig& c) { c.phases.subcluster = 3; }, ">= 4");
    reject([](SimConfig& c) { c.refresh_interval = 0; }, "refresh_interval");
    reject([](SimConfig& c) { c.assignment.clear(); }, "no subjects");
    reject([](SimConfig& c) { c.assignment = {{"nope", 12}}; }, "unknown subject");
    reject([](SimConfig& c) { c.assignment = {{"sa", 6}, {"sa", 6}}; }, "duplicate");
    reject([](SimConfig& c) { c.assignment = {{"sb", 6}, {"sa", 6}}; }, "not sorted");
    reject([](SimConfig& c) { c.assignment = {{"sa", 0}, {"sb", 12}}; }, ">= 1");
    reject([](SimConfig& c) { c.assignment = {{"sa", 5}}; }, "counts sum");
}

TEST_CASE("only same-subject links carry a component together") {
    const std::string sa = "sa", sb = "sb";

    SUBCASE("the broadcast ball is closed at its boundary") {
        std::vector<Vec2> pos{{0, 0}, {10, 0}};
        std::vector<std::string> subj{sa, sa};
        auto joined = same_subject_components(pos, 10.0, subj, sa);
        CHECK(joined == std::vector<std::vector<NodeId>>{{0, 1}});

        pos[1].x = 10.001;
        auto split = same_subject_components(pos, 10.0, subj, sa);
        CHECK(split == std::vector<std::vector<NodeId>>{{0}, {1}});
    }

    SUBCASE("a node of another subject does not bridge the gap") {
        std::vector<Vec2> pos{{0, 0}, {16, 0}, {8, 0}};
        std::vector<std::string> subj{sa, sa, sb};
        CHECK(same_subject_components(pos, 10.0, subj, sa) ==
              std::vector<std::vector<NodeId>>{{0}, {1}});
        CHECK(same_subject_components(pos, 10.0, subj, sb) ==
              std::vector<std::vector<NodeId>>{{2}});
    }

    SUBCASE("chains of members relay across the hall") {
        std::vector<Vec2> pos{{0, 0}, {9, 0}, {18, 0}};
        std::vector<std::string> subj{sa, sa, sa};
        CHECK(same_subject_components(pos, 10.0, subj, sa) ==
              std::vector<std::vector<NodeId>>{{0, 1, 2}});
    }

    SUBCASE("random layouts agree with an independent grouping") {
        std::mt19937_64 rng(99);
        auto u01 = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 2 + rng() % 28;
            std::vector<Vec2> pos(n);
            std::vector<std::string> subj(n);
            for (std::size_t v = 0; v < n; ++v) {
                pos[v] = {u01() * 40.0, u01() * 40.0};
                subj[v] = (rng() % 2) ? sa : sb;
            }
            for (const auto& s : {sa, sb})
                CHECK(same_subject_components(pos, 10.0, subj, s) ==
                      testsupport::brute_components(pos, 10.0, subj, s));
        }
    }
}

TEST_CASE("a well-connected hall settles everyone around one cluster point") {
    World w(base_config(), sim_tree(), sim_catalog());
    w.run();

    CHECK(w.drained());
    CHECK(w.clock() == w.metrics().window_end);
    CHECK(w.metrics().in_flight_at_window_end == 0);
    CHECK(w.metrics().malformed_dropped == 0);
    CHECK(w.config().density.total_nodes == 12);

    REQUIRE(w.reachability("sa").size() == 1);
    CHECK(w.reachability("sa")[0].size() == 12);

    // one elected point, shared by every snapshot and every final belief
    const NodeId cp = w.metrics().elect_snapshot[0].best_origin;
    for (const auto& snap : w.metrics().elect_snapshot) CHECK(snap.best_origin == cp);
    CHECK(is_cluster_point(w.nodes()[cp]));

    const Vec2 home = w.nodes()[cp].location;
    for (const auto& node : w.nodes()) {
        REQUIRE(node.joined_primary.has_value());
        CHECK(*node.joined_primary == cp);
        CHECK(distance(node.location, home) <= w.config().arrival_radius + 1e-9);
        CHECK(node.location.x >= 0.0);
        CHECK(node.location.x <= w.config().hall_width);
        CHECK(node.location.y >= 0.0);
        CHECK(node.location.y <= w.config().hall_height);
        CHECK(node.joined_sub.has_value());  // everyone found a topic corner too
    }

    // arrivals all land inside their scheduled windows
    const auto& primary = w.metrics().primary_events.at("sa");
    CHECK(primary.size() == 12);
    for (const auto& e : primary) CHECK(e.tick <= w.metrics().converge_end);
    const auto& sub = w.metrics().sub_events.at("sa");
    CHECK(sub.size() == 12);
    for (const auto& e : sub) CHECK(e.tick <= w.metrics().subcluster_end);

    CHECK(w.metrics().census.size() == 12);
    for (const auto& row : w.metrics().census) {
        CHECK(row.cluster_point == cp);
        CHECK(row.subject == "sa");
        CHECK(!row.topic.empty());
    }

    const VerifyReport report = verify_election(w);
    CHECK(report.ok());
    CHECK(report.nodes_checked == 12);

    CHECK_THROWS_AS(w.run(), std::logic_error);  // a world runs once
}

TEST_CASE("transmissions are counted even when nobody is in range") {
    SimConfig cfg = base_config();
    cfg.population = 1;
    cfg.assignment = {{"sa", 1}};
    World w(cfg, sim_tree(), sim_catalog());
    w.run();

    CHECK(w.metrics().total_transmissions > 0);
    CHECK(w.metrics().total_deliveries == 0);
    CHECK(w.metrics().in_flight_at_window_end == 0);

    // alone, the node elects itself and is already standing at its point
    const auto& node = w.nodes()[0];
    CHECK(node.joined_primary == std::optional<NodeId>(0));
    CHECK(w.metrics().time_to_form("sa") == 0);
    REQUIRE(w.metrics().census.size() == 1);
    CHECK(w.metrics().census[0].cluster_point == 0);
}

TEST_CASE("a quorum threshold nobody meets keeps the whole room seated") {
    SimConfig cfg = base_config();
    cfg.density.min_density = 0.99;  // densities here top out well below this
    World w(cfg, sim_tree(), sim_catalog());
    w.run();

    CHECK(w.drained());
    CHECK(w.metrics().census.empty());
    CHECK(w.metrics().primary_events.empty());
    CHECK_THROWS_AS(w.metrics().time_to_form("sa"), NoDataError);
    for (const auto& node : w.nodes()) {
        CHECK(!node.joined_primary.has_value());
        CHECK(node.location.x == doctest::Approx(w.initial_positions()[node.id].x));
    }
}

TEST_CASE("reruns with one seed are identical and another seed diverges") {
    SimConfig cfg = base_config();
    cfg.population = 16;
    cfg.hall_width = 40.0;
    cfg.hall_height = 40.0;
    cfg.radio_range = 12.0;  // fragmented on purpose
    cfg.seed = 5;
    cfg.assignment = {{"sa", 9}, {"sb", 7}};

    World w1(cfg, sim_tree(), sim_catalog());
    World w2(cfg, sim_tree(), sim_catalog());
    w1.run();
    w2.run();

    CHECK(w1.metrics().traffic == w2.metrics().traffic);
    CHECK(w1.metrics().total_transmissions == w2.metrics().total_transmissions);
    CHECK(w1.metrics().total_deliveries == w2.metrics().total_deliveries);
    REQUIRE(w1.metrics().census.size() == w2.metrics().census.size());
    for (std::size_t i = 0; i < w1.metrics().census.size(); ++i) {
        CHECK(w1.metrics().census[i].cluster_point == w2.metrics().census[i].cluster_point);
        CHECK(w1.metrics().census[i].member == w2.metrics().census[i].member);
    }
    for (NodeId v = 0; v < 16; ++v) {
        CHECK(w1.metrics().elect_snapshot[v].best_origin ==
              w2.metrics().elect_snapshot[v].best_origin);
        CHECK(w1.nodes()[v].location.x == w2.nodes()[v].location.x);
        CHECK(w1.nodes()[v].location.y == w2.nodes()[v].location.y);
    }

    SimConfig other = cfg;
    other.seed = 6;
    World w3(other, sim_tree(), sim_catalog());
    bool same_layout = true;
    for (NodeId v = 0; v < 16; ++v)
        same_layout = same_layout &&
                      w3.initial_positions()[v].x == w1.initial_positions()[v].x &&
                      w3.initial_positions()[v].y == w1.initial_positions()[v].y;
    CHECK(!same_layout);
}

TEST_CASE("fragmented halls still elect one point per island") {
    SimConfig cfg = base_config();
    cfg.population = 24;
    cfg.hall_width = 50.0;
    cfg.hall_height = 50.0;
    cfg.radio_range = 10.0;
    cfg.assignment = {{"sa", 13}, {"sb", 11}};

    for (std::uint64_t seed : {21, 22, 23}) {
        cfg.seed = seed;
        World w(cfg, sim_tree(), sim_catalog());
        w.run();
        const VerifyReport report = verify_election(w);
        CHECK(report.ok());
        CHECK(report.nodes_checked == 24);
        CHECK(report.subjects_checked == 2);
        CHECK(w.metrics().in_flight_at_window_end == 0);

        // every island of every subject agrees on exactly one point inside it
        for (const auto& s : {std::string("sa"), std::string("sb")}) {
            for (const auto& comp : w.reachability(s)) {
                std::set<NodeId> points;
                for (NodeId v : comp) points.insert(w.nodes()[v].primary.best_origin);
                CHECK(points.size() == 1);
                CHECK(std::binary_search(comp.begin(), comp.end(), *points.begin()));
            }
        }
    }
}
