#include "orgsim/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "orgsim/errors.hpp"

namespace orgsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_id(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

std::vector<Concept> split_concepts(const std::string& list) {
    std::vector<Concept> out;
    std::string item;
    std::istringstream ss(list);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

ConceptSet ConceptSet::of(std::vector<Concept> members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    ConceptSet s;
    s.members_ = std::move(members);
    return s;
}

void ConceptSet::add(const Concept& c) {
    auto it = std::lower_bound(members_.begin(), members_.end(), c);
    if (it == members_.end() || *it != c) members_.insert(it, c);
}

bool ConceptSet::contains(const Concept& c) const {
    return std::binary_search(members_.begin(), members_.end(), c);
}

ConceptTree ConceptTree::from_edges(const std::vector<std::pair<Concept, Concept>>& edges) {
    if (edges.empty()) throw ConfigError("concept tree: no edges");

    ConceptTree t;
    std::unordered_map<Concept, bool> is_child;
    for (const auto& [parent, child] : edges) {
        if (parent.empty() || child.empty())
            throw ConfigError("concept tree: empty concept name in edge");
        if (parent == child)
            throw ConfigError("concept tree: self-edge at '" + parent + "'");
        if (t.parent_.count(child))
            throw ConfigError("concept tree: '" + child + "' has more than one parent");
        t.parent_[child] = parent;
        is_child[child] = true;
        if (!is_child.count(parent)) is_child[parent] = false;
    }

    for (const auto& [name, child] : is_child) {
        if (child) continue;
        if (!t.root_.empty())
            throw ConfigError("concept tree: multiple roots ('" + t.root_ + "', '" + name + "')");
        t.root_ = name;
    }
    if (t.root_.empty()) throw ConfigError("concept tree: no root (edge cycle)");

    // Depths via parent chains; a chain longer than the node count is a cycle.
    const std::size_t n = is_child.size();
    t.depth_[t.root_] = 0;
    for (const auto& [name, unused] : is_child) {
        (void)unused;
        std::vector<const Concept*> path;
        const Concept* cur = &name;
        while (!t.depth_.count(*cur)) {
            path.push_back(cur);
            if (path.size() > n)
                throw ConfigError("concept tree: cycle through '" + name + "'");
            cur = &t.parent_.at(*cur);
        }
        int d = t.depth_.at(*cur);
        for (auto it = path.rbegin(); it != path.rend(); ++it) t.depth_[**it] = ++d;
    }

    t.concepts_.reserve(n);
    for (const auto& [name, unused] : t.depth_) {
        (void)unused;
        t.concepts_.push_back(name);
    }
    std::sort(t.concepts_.begin(), t.concepts_.end());
    return t;
}

int ConceptTree::depth(const Concept& c) const {
    auto it = depth_.find(c);
    if (it == depth_.end()) throw InvalidConceptError("unknown concept '" + c + "'");
    return it->second;
}

const Concept& ConceptTree::lca(const Concept& a, const Concept& b) const {
    int da = depth(a);
    int db = depth(b);
    // Walk on the canonical stored keys so we can return a stable reference.
    const Concept* pa = &depth_.find(a)->first;
    const Concept* pb = &depth_.find(b)->first;
    while (da > db) {
        pa = &parent_.at(*pa);
        --da;
    }
    while (db > da) {
        pb = &parent_.at(*pb);
        --db;
    }
    while (*pa != *pb) {
        pa = &parent_.at(*pa);
        pb = &parent_.at(*pb);
    }
    return *pa;
}

double ConceptTree::con_sim(const Concept& a, const Concept& b) const {
    const int da = depth(a);
    const int db = depth(b);
    if (a == b) return 1.0;  // also sidesteps 0/0 at the root
    const int dg = depth_.at(lca(a, b));
    return (2.0 * dg) / (da + db);
}

double ConceptTree::set_sim(const ConceptSet& a, const ConceptSet& b) const {
    if (a.empty() || b.empty()) throw std::invalid_argument("set_sim: empty concept set");

    auto directed = [this](const ConceptSet& from, const ConceptSet& to) {
        double sum = 0.0;
        for (const Concept& x : from.members()) {
            double best = 0.0;
            for (const Concept& y : to.members()) best = std::max(best, con_sim(x, y));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return 0.5 * (directed(a, b) + directed(b, a));
}

const SubjectDef* SubjectCatalog::find_subject(const std::string& id) const {
    for (const auto& s : subjects)
        if (s.id == id) return &s;
    return nullptr;
}

const SubjectDef* SubjectCatalog::subject_of_topic(const std::string& topic_id) const {
    for (const auto& s : subjects)
        for (const auto& t : s.topics)
            if (t.id == topic_id) return &s;
    return nullptr;
}

Classification classify(const ConceptTree& tree, const SubjectCatalog& catalog,
                        const Profile& profile) {
    if (profile.interests.empty())
        throw std::invalid_argument("classify: profile has no interests");
    if (catalog.subjects.empty()) throw std::invalid_argument("classify: empty catalog");

    const SubjectDef* best = nullptr;
    double best_score = -1.0;
    for (const auto& s : catalog.subjects) {
        const double score = tree.set_sim(profile.interests, s.concepts);
        // Subjects are sorted by id, so strict > keeps the lexicographically
        // smaller id on ties.
        if (score > best_score) {
            best = &s;
            best_score = score;
        }
    }

    Classification cls;
    cls.subject = best->id;
    cls.expertise = std::clamp(best_score, 0.0, 1.0);

    std::vector<std::pair<double, std::string>> scored;
    for (const auto& t : best->topics)
        scored.emplace_back(tree.set_sim(profile.interests, t.concepts), t.id);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first > r.first;
        return l.second < r.second;
    });
    for (const auto& [score, id] : scored)
        if (score > 0.0) cls.topics.push_back(id);
    if (cls.topics.empty()) cls.topics.push_back(best->topics.front().id);
    return cls;
}

Profile refine(Profile profile, const Concept& observed, Tick t) {
    if (!profile.history.empty() && t < profile.history.back().first)
        throw InvalidTimeError("refine: time " + std::to_string(t) +
                               " precedes last history entry at " +
                               std::to_string(profile.history.back().first));
    profile.history.emplace_back(t, observed);
    profile.interests.add(observed);
    return profile;
}

ConceptTree load_concept_tree(std::istream& in, const std::string& source_name) {
    std::vector<std::pair<Concept, Concept>> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": expected 'parent<TAB>child'");
        edges.emplace_back(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
    }
    try {
        return ConceptTree::from_edges(edges);
    } catch (const ConfigError& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
}

ConceptTree load_concept_tree_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open concept tree file '" + path + "'");
    return load_concept_tree(in, path);
}

SubjectCatalog load_catalog(std::istream& in, const ConceptTree& tree,
                            const std::string& source_name) {
    SubjectCatalog cat;
    std::string line;
    int lineno = 0;

    auto fail = [&](const std::string& msg) -> ConfigError {
        return ConfigError(source_name + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto parse_concepts = [&](const std::string& list) {
        auto names = split_concepts(list);
        if (names.empty()) throw fail("empty concept list");
        for (const auto& c : names)
            if (!tree.contains(c)) throw fail("unknown concept '" + c + "'");
        return ConceptSet::of(std::move(names));
    };

    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;

        const auto colon = line.find(':');
        if (colon == std::string::npos) throw fail("expected 'subject ...' or 'topic ...'");
        const std::string head = trim(line.substr(0, colon));
        const std::string body = line.substr(colon + 1);

        if (head.rfind("subject ", 0) == 0) {
            const std::string id = trim(head.substr(8));
            if (!valid_id(id)) throw fail("bad subject id '" + id + "'");
            if (cat.find_subject(id)) throw fail("duplicate subject '" + id + "'");
            cat.subjects.push_back({id, parse_concepts(body), {}});
        } else if (head.rfind("topic ", 0) == 0) {
            const std::string ref = trim(head.substr(6));
            const auto slash = ref.find('/');
            if (slash == std::string::npos) throw fail("expected 'topic <subject>/<id>'");
            const std::string sid = ref.substr(0, slash);
            const std::string tid = ref.substr(slash + 1);
            if (!valid_id(tid)) throw fail("bad topic id '" + tid + "'");
            if (cat.subject_of_topic(tid))
                throw fail("duplicate topic '" + tid + "'");
            auto it = std::find_if(cat.subjects.begin(), cat.subjects.end(),
                                   [&](const SubjectDef& s) { return s.id == sid; });
            if (it == cat.subjects.end())
                throw fail("topic '" + tid + "' references undeclared subject '" + sid + "'");
            it->topics.push_back({tid, parse_concepts(body)});
        } else {
            throw fail("expected 'subject ...' or 'topic ...'");
        }
    }

    if (cat.subjects.empty()) throw ConfigError(source_name + ": no subjects");
    for (const auto& s : cat.subjects)
        if (s.topics.empty())
            throw ConfigError(source_name + ": subject '" + s.id + "' has no topics");

    std::sort(cat.subjects.begin(), cat.subjects.end(),
              [](const SubjectDef& a, const SubjectDef& b) { return a.id < b.id; });
    for (auto& s : cat.subjects)
        std::sort(s.topics.begin(), s.topics.end(),
                  [](const TopicDef& a, const TopicDef& b) { return a.id < b.id; });
    return cat;
}

SubjectCatalog load_catalog_file(const std::string& path, const ConceptTree& tree) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open catalog file '" + path + "'");
    return load_catalog(in, tree, path);
}

}  // namespace orgsim
