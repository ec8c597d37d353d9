#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "orgsim/cli.hpp"
#include "orgsim/errors.hpp"
#include "orgsim/scenario.hpp"
#include "orgsim/sweep.hpp"
#include "support/oracles.hpp"

using namespace orgsim;
using testsupport::read_csv;
using testsupport::TempDir;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

// Two subjects, two topics and one topic respectively, all under one root.
void write_inputs(const TempDir& dir) {
    write_file(dir.sub("tax.tsv"),
               "all\tfa\n"
               "all\tfb\n"
               "fa\ta_core\n"
               "fa\ta_t1c\n"
               "fa\ta_t2c\n"
               "fb\tb_core\n"
               "fb\tb_t1c\n");
    write_file(dir.sub("cat.txt"),
               "subject sa: a_core\n"
               "topic sa/sa1: a_t1c\n"
               "topic sa/sa2: a_t2c\n"
               "subject sb: b_core\n"
               "topic sb/sb1: b_t1c\n");
}

const char* kBaseScenario =
    "taxonomy tax.tsv\n"
    "catalog cat.txt\n"
    "population 10\n"
    "hall 25 25\n"
    "radio_range 40\n"
    "walk_speed 2\n"
    "arrival_radius 2\n"
    "ttl 12\n"
    "seed 9\n"
    "subject_weight sa 1\n"
    "subject_weight sb 1\n";

}  // namespace

TEST_CASE("a scenario file sets every knob it names") {
    TempDir dir;
    write_inputs(dir);
    write_file(dir.sub("full.scn"),
               "# hall and radio\n"
               "taxonomy tax.tsv\n"
               "catalog cat.txt\n"
               "\n"
               "population 9\n"
               "hall 30 20\n"
               "radio_range 8\n"
               "walk_speed 1.5\n"
               "arrival_radius 1.25\n"
               "tick_seconds 0.5\n"
               "ttl 24\n"
               "alpha 0.6\n"
               "beta 0.4\n"
               "min_density 0.1\n"
               "seed 77\n"
               "refresh_interval 15\n"
               "trace on\n"
               "phase discover 10\n"
               "phase steady 50\n"
               "subject_nodes sa 6\n"
               "subject_nodes sb 3\n");

    Scenario sc = load_scenario_file(dir.sub("full.scn"));
    CHECK(sc.config.population == 9);
    CHECK(sc.config.hall_width == 30.0);
    CHECK(sc.config.hall_height == 20.0);
    CHECK(sc.config.radio_range == 8.0);
    CHECK(sc.config.walk_speed == 1.5);
    CHECK(sc.config.arrival_radius == 1.25);
    CHECK(sc.config.tick_seconds == 0.5);
    CHECK(sc.config.ttl == 24);
    CHECK(sc.config.density.alpha == 0.6);
    CHECK(sc.config.density.beta == 0.4);
    CHECK(sc.config.density.min_density == 0.1);
    CHECK(sc.config.seed == 77);
    CHECK(sc.config.refresh_interval == 15);
    CHECK(sc.config.trace);
    CHECK(sc.config.phases.discover == 10);
    CHECK(sc.config.phases.steady == 50);
    CHECK(sc.config.phases.elect == 40);  // untouched phases keep defaults
    REQUIRE(sc.config.assignment.size() == 2);
    CHECK(sc.config.assignment[0].subject == "sa");
    CHECK(sc.config.assignment[0].count == 6);
    CHECK(sc.config.assignment[1].count == 3);
    CHECK(sc.tree.contains("a_t2c"));  // relative paths resolved next to the file
    CHECK(sc.catalog.has_subject("sb"));
}

TEST_CASE("scenario diagnostics carry the file and line of the offense") {
    TempDir dir;
    write_inputs(dir);
    auto reject = [&](const std::string& bad_line, const char* needle) {
        write_file(dir.sub("bad.scn"), bad_line + "\n" + kBaseScenario);
        CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("bad.scn")),
                             doctest::Contains(needle), ConfigError);
        CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("bad.scn")),
                             doctest::Contains("bad.scn:1:"), ConfigError);
    };

    reject("frobnicate 3", "unknown key");
    reject("population abc", "bad integer value");
    reject("radio_range wat", "bad numeric value");
    reject("population", "missing value");
    reject("population 5 5", "trailing junk");
    reject("phase warmup 10", "unknown phase");
    reject("trace maybe", "trace must be on or off");

    write_file(dir.sub("both.scn"),
               std::string(kBaseScenario) + "subject_nodes sa 10\n");
    CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("both.scn")),
                         doctest::Contains("appears in both"), ConfigError);

    write_file(dir.sub("no_tax.scn"), "catalog cat.txt\npopulation 4\nsubject_weight sa 1\n");
    CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("no_tax.scn")),
                         doctest::Contains("missing 'taxonomy' entry"), ConfigError);

    write_file(dir.sub("no_cat.scn"), "taxonomy tax.tsv\npopulation 4\nsubject_weight sa 1\n");
    CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("no_cat.scn")),
                         doctest::Contains("missing 'catalog' entry"), ConfigError);

    CHECK_THROWS_AS(load_scenario_file(dir.sub("absent.scn")), IoError);

    // structurally valid text can still describe an unusable configuration
    write_file(dir.sub("tight.scn"),
               std::string(kBaseScenario) + "arrival_radius 50\n");
    CHECK_THROWS_WITH_AS(load_scenario_file(dir.sub("tight.scn")),
                         doctest::Contains("arrival_radius"), ConfigError);
}

TEST_CASE("node counts follow pinned entries, then weighted remainders") {
    using Pinned = std::vector<SubjectCount>;
    using Weights = std::vector<std::pair<std::string, double>>;

    auto counts = resolve_assignment(10, {}, Weights{{"a", 1}, {"b", 1}, {"c", 1}});
    REQUIRE(counts.size() == 3);
    CHECK(counts[0].count == 4);  // the leftover node goes to the first tied subject
    CHECK(counts[1].count == 3);
    CHECK(counts[2].count == 3);

    counts = resolve_assignment(7, {}, Weights{{"a", 1}, {"b", 3}});
    CHECK(counts[0].count == 2);  // 1.75 rounds up ahead of 5.25
    CHECK(counts[1].count == 5);

    counts = resolve_assignment(1, {}, Weights{{"a", 1}, {"b", 1000}});
    REQUIRE(counts.size() == 1);  // subjects that round to zero drop out
    CHECK(counts[0].subject == "b");
    CHECK(counts[0].count == 1);

    counts = resolve_assignment(5, Pinned{{"z", 2}}, Weights{{"a", 1}});
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].subject == "a");  // result is sorted by subject id
    CHECK(counts[0].count == 3);
    CHECK(counts[1].subject == "z");
    CHECK(counts[1].count == 2);

    counts = resolve_assignment(6, Pinned{{"a", 2}, {"b", 4}}, {});
    CHECK(counts.size() == 2);

    CHECK_THROWS_WITH_AS(resolve_assignment(10, Pinned{{"a", 12}}, {}),
                         doctest::Contains("exceeds population"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_assignment(10, Pinned{{"a", 4}}, {}),
                         doctest::Contains("do not cover"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_assignment(10, {}, Weights{{"a", 0.0}}),
                         doctest::Contains("must be positive"), ConfigError);
}

TEST_CASE("the run command writes the tables and a human-readable summary") {
    TempDir dir;
    write_inputs(dir);
    write_file(dir.sub("base.scn"), kBaseScenario);

    const std::string out = dir.sub("out");
    REQUIRE(cmd_run(dir.sub("base.scn"), out, std::nullopt) == 0);
    for (const char* name : {"traffic.csv", "formation.csv", "census.csv"})
        CHECK(std::ifstream(out + "/" + name).good());

    std::ifstream summary(out + "/summary.txt");
    REQUIRE(summary.good());
    std::string line1, line2;
    REQUIRE(std::getline(summary, line1));
    REQUIRE(std::getline(summary, line2));
    CHECK(line1.substr(0, 8) == "sa n=5 t");
    CHECK(line2.substr(0, 8) == "sb n=5 t");
    CHECK(line1.find("time_to_form=") != std::string::npos);
    CHECK(line1.find("time_to_form=-1") == std::string::npos);  // this hall always forms

    // formation.csv tells the same story as the summary
    auto formation = read_csv(out + "/formation.csv");
    REQUIRE(formation.size() == 3);
    CHECK(formation[1][0] == "sa");
    CHECK(formation[1][1] == "5");
    CHECK(formation[1][2] != "-1");

    // an explicit seed is accepted and the run still completes
    CHECK(cmd_run(dir.sub("base.scn"), dir.sub("out2"), std::uint64_t{1234}) == 0);
}

TEST_CASE("the verify command blesses runs whose elections match the geometry") {
    TempDir dir;
    write_inputs(dir);
    write_file(dir.sub("base.scn"), kBaseScenario);
    CHECK(cmd_verify(dir.sub("base.scn"), std::nullopt) == 0);
    CHECK(cmd_verify(dir.sub("base.scn"), std::uint64_t{31}) == 0);

    // a fragmented hall exercises the multi-component path
    write_file(dir.sub("frag.scn"),
               "taxonomy tax.tsv\n"
               "catalog cat.txt\n"
               "population 14\n"
               "hall 60 60\n"
               "radio_range 9\n"
               "arrival_radius 2\n"
               "seed 13\n"
               "subject_weight sa 1\n"
               "subject_weight sb 1\n");
    CHECK(cmd_verify(dir.sub("frag.scn"), std::nullopt) == 0);
}

TEST_CASE("the sweep command reports each run and the medians per size") {
    TempDir dir;
    write_inputs(dir);
    write_file(dir.sub("base.scn"), kBaseScenario);
    write_file(dir.sub("tiny.swp"),
               "scenario base.scn\n"
               "nodes 4,6\n"
               "seeds 2\n");

    const SweepSpec spec = load_sweep_file(dir.sub("tiny.swp"));
    CHECK(spec.nodes == std::vector<std::uint32_t>{4, 6});
    CHECK(spec.seeds == 2);

    const std::string out = dir.sub("sweep_out");
    REQUIRE(cmd_sweep(dir.sub("tiny.swp"), out) == 0);

    auto rows = read_csv(out + "/sweep.csv");
    REQUIRE(rows.size() == 9);  // header + 2 sizes x 2 seeds x 2 subjects
    CHECK(rows[0] == std::vector<std::string>{"n_nodes", "seed", "subject",
                                              "time_to_form_ticks"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK((rows[i][0] == "4" || rows[i][0] == "6"));
        CHECK(std::stol(rows[i][3]) >= 0);
    }

    auto medians = read_csv(out + "/sweep_medians.csv");
    REQUIRE(medians.size() == 3);
    CHECK(medians[0] == std::vector<std::string>{"n_nodes", "median_time_to_form_ticks"});
    CHECK(medians[1][0] == "4");
    CHECK(medians[2][0] == "6");

    write_file(dir.sub("broken.swp"), "nodes 4\nseeds 1\n");
    CHECK_THROWS_WITH_AS(load_sweep_file(dir.sub("broken.swp")),
                         doctest::Contains("missing 'scenario' entry"), ConfigError);
}

TEST_CASE("exit codes separate bad input from runtime failure") {
    TempDir dir;
    write_inputs(dir);
    write_file(dir.sub("tight.scn"), std::string(kBaseScenario) + "arrival_radius 50\n");

    CHECK(cmd_run(dir.sub("tight.scn"), dir.sub("x"), std::nullopt) == 1);
    CHECK(cmd_run(dir.sub("missing.scn"), dir.sub("x"), std::nullopt) == 2);
    CHECK(cmd_sweep(dir.sub("missing.swp"), dir.sub("x")) == 2);
    CHECK(cmd_verify(dir.sub("missing.scn"), std::nullopt) == 2);
}
