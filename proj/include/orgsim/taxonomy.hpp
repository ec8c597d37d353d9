#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "orgsim/types.hpp"

namespace orgsim {

using Concept = std::string;

/// Non-empty set of concept identifiers, kept sorted and duplicate-free.
class ConceptSet {
public:
    ConceptSet() = default;
    static ConceptSet of(std::vector<Concept> members);

    void add(const Concept& c);
    bool contains(const Concept& c) const;
    bool empty() const { return members_.empty(); }
    std::size_t size() const { return members_.size(); }
    const std::vector<Concept>& members() const { return members_; }

    bool operator==(const ConceptSet&) const = default;

private:
    std::vector<Concept> members_;  // sorted, unique
};

/// Rooted tree of interest concepts. Concept similarity is evaluated on arc
/// depths: the similarity of two concepts is 2*depth(g)/(depth(a)+depth(b))
/// where g is their deepest common ancestor and depth counts arcs from the
/// root. Identical concepts score 1 by definition, which also covers the
/// root/root case where the quotient would be 0/0.
class ConceptTree {
public:
    /// Builds and validates a tree from (parent, child) edges. Exactly one
    /// concept may appear only on the parent side; it becomes the root.
    static ConceptTree from_edges(const std::vector<std::pair<Concept, Concept>>& edges);

    const Concept& root() const { return root_; }
    bool contains(const Concept& c) const { return depth_.count(c) != 0; }
    std::size_t size() const { return depth_.size(); }
    /// All concepts in sorted order.
    const std::vector<Concept>& concepts() const { return concepts_; }

    /// Number of arcs separating c from the root; depth(root) = 0.
    int depth(const Concept& c) const;
    /// Deepest common ancestor; a concept is an ancestor of itself.
    const Concept& lca(const Concept& a, const Concept& b) const;
    /// Concept similarity in [0,1]; equals 1 iff a == b.
    double con_sim(const Concept& a, const Concept& b) const;
    /// Symmetric best-match average of con_sim over two concept sets:
    ///   1/2 * [ mean_a max_b con_sim(a,b) + mean_b max_a con_sim(a,b) ]
    double set_sim(const ConceptSet& a, const ConceptSet& b) const;

private:
    Concept root_;
    std::unordered_map<Concept, Concept> parent_;
    std::unordered_map<Concept, int> depth_;
    std::vector<Concept> concepts_;
};

/// One attendee's declared interests plus interaction history.
struct Profile {
    NodeId node_id = 0;
    ConceptSet interests;
    std::vector<std::pair<Tick, Concept>> history;  // times non-decreasing
    std::string occupation;
};

struct TopicDef {
    std::string id;
    ConceptSet concepts;
};

struct SubjectDef {
    std::string id;
    ConceptSet concepts;
    std::vector<TopicDef> topics;  // sorted by id
};

/// Predefined subjects, each with at least one topic. Subject and topic ids
/// are unique across the catalog and restricted to [A-Za-z0-9_-].
struct SubjectCatalog {
    std::vector<SubjectDef> subjects;  // sorted by id

    const SubjectDef* find_subject(const std::string& id) const;
    bool has_subject(const std::string& id) const { return find_subject(id) != nullptr; }
    /// Subject owning the given topic, or nullptr.
    const SubjectDef* subject_of_topic(const std::string& topic_id) const;
};

/// Result of matching a profile against the catalog.
struct Classification {
    std::string subject;
    double expertise = 0.0;              // in [0,1]
    std::vector<std::string> topics;     // ranked best first, never empty
};

/// Picks the best-matching subject (ties by lexicographic id), ranks its
/// topics by set similarity against the profile interests (zero-score topics
/// dropped, unless all score zero), and uses the winning subject score as the
/// expertise weight.
Classification classify(const ConceptTree& tree, const SubjectCatalog& catalog,
                        const Profile& profile);

/// Returns a copy of the profile with (t, observed) appended to the history
/// and the observed concept added to the declared interests. Reclassification
/// is the caller's job.
Profile refine(Profile profile, const Concept& observed, Tick t);

/// Parses the newline-delimited edge-list format, one `parent<TAB>child` per
/// line. Blank lines are ignored.
ConceptTree load_concept_tree(std::istream& in, const std::string& source_name);
ConceptTree load_concept_tree_file(const std::string& path);

/// Parses catalog records of the form
///   subject <id>: c1,c2,...
///   topic <subject-id>/<id>: c1,c2,...
/// and validates every referenced concept against the tree.
SubjectCatalog load_catalog(std::istream& in, const ConceptTree& tree,
                            const std::string& source_name);
SubjectCatalog load_catalog_file(const std::string& path, const ConceptTree& tree);

}  // namespace orgsim
