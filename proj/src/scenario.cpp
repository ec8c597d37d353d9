#include "orgsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orgsim/errors.hpp"

namespace orgsim {

namespace {

struct Line {
    int no = 0;
    std::string key;
    std::string rest;
};

[[noreturn]] void fail(const std::string& src, int lineno, const std::string& msg) {
    throw ConfigError(src + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& src, const Line& l, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(src, l.no, "bad numeric value for '" + l.key + "': '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& src, const Line& l, const std::string& text) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size() || (!text.empty() && text[0] == '-'))
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(src, l.no, "bad integer value for '" + l.key + "': '" + text + "'");
    }
}

}  // namespace

std::vector<SubjectCount> resolve_assignment(
    std::uint32_t population, const std::vector<SubjectCount>& pinned,
    const std::vector<std::pair<std::string, double>>& weights) {
    std::uint64_t pinned_sum = 0;
    for (const auto& p : pinned) pinned_sum += p.count;
    if (pinned_sum > population)
        throw ConfigError("subject_nodes: pinned counts sum to " + std::to_string(pinned_sum) +
                          ", which exceeds population " + std::to_string(population));
    const std::uint32_t remainder = population - static_cast<std::uint32_t>(pinned_sum);

    std::vector<SubjectCount> out = pinned;
    if (remainder > 0) {
        if (weights.empty())
            throw ConfigError(
                "subject_nodes: counts do not cover the population and no subject_weight "
                "entries exist to take the remaining " +
                std::to_string(remainder) + " nodes");
        double wsum = 0.0;
        for (const auto& [subject, w] : weights) {
            (void)subject;
            if (!(w > 0.0)) throw ConfigError("subject_weight: weights must be positive");
            wsum += w;
        }
        // Largest-remainder apportionment, ties by subject id (the weights
        // list arrives sorted by id).
        std::vector<std::uint32_t> base(weights.size());
        std::vector<std::pair<double, std::size_t>> frac;
        std::uint32_t assigned = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double exact = remainder * (weights[i].second / wsum);
            base[i] = static_cast<std::uint32_t>(std::floor(exact));
            assigned += base[i];
            frac.emplace_back(exact - std::floor(exact), i);
        }
        std::stable_sort(frac.begin(), frac.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::uint32_t k = 0; k < remainder - assigned; ++k) ++base[frac[k % frac.size()].second];
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (base[i] > 0) out.push_back({weights[i].first, base[i]});
    }

    std::sort(out.begin(), out.end(),
              [](const SubjectCount& a, const SubjectCount& b) { return a.subject < b.subject; });
    return out;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    const std::string dir = std::filesystem::path(path).parent_path().string();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || p.front() == '/' || dir.empty()) return p;
        return dir + "/" + p;
    };

    SimConfig cfg;
    std::string taxonomy_path;
    std::string catalog_path;
    std::vector<SubjectCount> pinned;
    std::vector<std::pair<std::string, double>> weights;

    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::istringstream ss(raw);
        Line l;
        l.no = lineno;
        if (!(ss >> l.key) || l.key[0] == '#') continue;

        auto next_word = [&]() {
            std::string w;
            if (!(ss >> w)) fail(path, lineno, "missing value for '" + l.key + "'");
            return w;
        };
        auto expect_end = [&]() {
            std::string extra;
            if (ss >> extra) fail(path, lineno, "trailing junk after '" + l.key + "'");
        };

        if (l.key == "taxonomy") {
            taxonomy_path = resolve(next_word());
        } else if (l.key == "catalog") {
            catalog_path = resolve(next_word());
        } else if (l.key == "population") {
            cfg.population = static_cast<std::uint32_t>(parse_u64(path, l, next_word()));
        } else if (l.key == "hall") {
            cfg.hall_width = parse_double(path, l, next_word());
            cfg.hall_height = parse_double(path, l, next_word());
        } else if (l.key == "radio_range") {
            cfg.radio_range = parse_double(path, l, next_word());
        } else if (l.key == "walk_speed") {
            cfg.walk_speed = parse_double(path, l, next_word());
        } else if (l.key == "arrival_radius") {
            cfg.arrival_radius = parse_double(path, l, next_word());
        } else if (l.key == "tick_seconds") {
            cfg.tick_seconds = parse_double(path, l, next_word());
        } else if (l.key == "ttl") {
            cfg.ttl = static_cast<int>(parse_u64(path, l, next_word()));
        } else if (l.key == "alpha") {
            cfg.density.alpha = parse_double(path, l, next_word());
        } else if (l.key == "beta") {
            cfg.density.beta = parse_double(path, l, next_word());
        } else if (l.key == "min_density") {
            cfg.density.min_density = parse_double(path, l, next_word());
        } else if (l.key == "seed") {
            cfg.seed = parse_u64(path, l, next_word());
        } else if (l.key == "refresh_interval") {
            cfg.refresh_interval = static_cast<Tick>(parse_u64(path, l, next_word()));
        } else if (l.key == "trace") {
            const std::string v = next_word();
            if (v == "on" || v == "1")
                cfg.trace = true;
            else if (v == "off" || v == "0")
                cfg.trace = false;
            else
                fail(path, lineno, "trace must be on or off");
        } else if (l.key == "phase") {
            const std::string which = next_word();
            const Tick dur = static_cast<Tick>(parse_u64(path, l, next_word()));
            if (which == "discover")
                cfg.phases.discover = dur;
            else if (which == "density_exchange")
                cfg.phases.density_exchange = dur;
            else if (which == "elect")
                cfg.phases.elect = dur;
            else if (which == "converge")
                cfg.phases.converge = dur;
            else if (which == "subcluster")
                cfg.phases.subcluster = dur;
            else if (which == "steady")
                cfg.phases.steady = dur;
            else
                fail(path, lineno, "unknown phase '" + which + "'");
        } else if (l.key == "subject_nodes") {
            const std::string subject = next_word();
            pinned.push_back(
                {subject, static_cast<std::uint32_t>(parse_u64(path, l, next_word()))});
        } else if (l.key == "subject_weight") {
            const std::string subject = next_word();
            weights.emplace_back(subject, parse_double(path, l, next_word()));
        } else {
            fail(path, lineno, "unknown key '" + l.key + "'");
        }
        expect_end();
    }

    if (taxonomy_path.empty()) throw ConfigError(path + ": missing 'taxonomy' entry");
    if (catalog_path.empty()) throw ConfigError(path + ": missing 'catalog' entry");

    Scenario sc;
    sc.tree = load_concept_tree_file(taxonomy_path);
    sc.catalog = load_catalog_file(catalog_path, sc.tree);

    std::sort(pinned.begin(), pinned.end(),
              [](const SubjectCount& a, const SubjectCount& b) { return a.subject < b.subject; });
    std::sort(weights.begin(), weights.end());
    for (const auto& [subject, w] : weights) {
        (void)w;
        for (const auto& p : pinned)
            if (p.subject == subject)
                throw ConfigError("subject '" + subject +
                                  "' appears in both subject_nodes and subject_weight");
    }
    cfg.assignment = resolve_assignment(cfg.population, pinned, weights);

    sc.config = std::move(cfg);
    validate_config(sc.config, sc.catalog);
    return sc;
}

}  // namespace orgsim
