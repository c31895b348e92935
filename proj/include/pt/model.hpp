#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pt {

using GeneId = std::string;
using SpeciesId = std::string;

// Leaf tokens must survive Newick round trips unquoted.
bool valid_label(const std::string& s);

enum class Event { Speciation, Duplication };

struct SpeciesMap {
    std::map<GeneId, SpeciesId> gene_to_species;

    const SpeciesId& at(const GeneId& g) const;
    bool contains(const GeneId& g) const { return gene_to_species.count(g) > 0; }
    std::set<SpeciesId> species() const;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& msg, size_t offset);
    size_t offset() const { return offset_; }

  private:
    size_t offset_;
};

// Rooted phylogenetic tree: no inner vertex of outdegree one, distinct
// leaf labels. Children are kept in canonical order (sorted by the
// smallest leaf label below) so equal trees serialize identically.
class RootedTree {
  public:
    struct Node {
        int parent = -1;
        std::vector<int> children;
        std::string label;       // leaf name; empty for inner vertices
        int event = -1;          // -1 none, else static_cast<int>(Event)
        double support = 0.0;
        bool has_support = false;
        bool unsupported = false;  // support reported as 1 with no evidence
    };

    RootedTree() = default;

    int add_leaf(const std::string& name);
    int add_inner(const std::vector<int>& children);
    void set_root(int v);

    int root() const { return root_; }
    size_t size() const { return nodes_.size(); }
    bool is_leaf(int v) const { return nodes_[v].children.empty(); }
    const Node& node(int v) const { return nodes_[v]; }
    Node& node(int v) { return nodes_[v]; }

    std::vector<int> leaves() const;
    std::vector<std::string> leaf_labels() const;  // sorted
    std::set<std::string> leaf_set(int v) const;
    std::vector<int> inner_vertices() const;
    int depth(int v) const;

    int leaf_by_label(const std::string& name) const;  // -1 if absent

    // Sorts children by minimum leaf label below; validates invariants.
    void canonicalize();

    int lca(int u, int v) const;
    int lca_leaves(const std::vector<std::string>& names) const;

  private:
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct Triple {
    std::string a, b;  // ingroup, stored sorted (a < b)
    std::string z;     // outgroup

    static Triple of(const std::string& x, const std::string& y, const std::string& out);
    auto operator<=>(const Triple&) const = default;
    std::set<std::string> leaf_set() const { return {a, b, z}; }
};

class TripleSet {
  public:
    void add(const Triple& t, double w = 1.0);       // accumulates weight
    void set_weight(const Triple& t, double w);
    double weight(const Triple& t) const;            // 0 if absent
    bool contains(const Triple& t) const;
    void add_leaf(const std::string& l) { leaves_.insert(l); }

    const std::map<Triple, double>& entries() const { return w_; }
    const std::set<std::string>& leaves() const { return leaves_; }
    size_t size() const { return w_.size(); }
    bool empty() const { return w_.empty(); }
    double total_weight() const;

  private:
    std::map<Triple, double> w_;
    std::set<std::string> leaves_;
};

class Hierarchy {
  public:
    Hierarchy() = default;
    // Starts out with the universe and all singletons.
    explicit Hierarchy(const std::set<std::string>& universe);

    // Throws if the cluster is empty or not a subset of the universe.
    void insert(const std::set<std::string>& cluster);

    const std::set<std::set<std::string>>& clusters() const { return clusters_; }
    const std::set<std::string>& universe() const { return universe_; }

    // First incompatible pair (p ∩ q ∉ {p, q, ∅}), if any.
    std::optional<std::pair<std::set<std::string>, std::set<std::string>>>
    incompatible_pair() const;

  private:
    std::set<std::string> universe_;
    std::set<std::set<std::string>> clusters_;
};

// --- operations ---

TripleSet displayed_triples(const RootedTree& t);
Hierarchy hierarchy_of(const RootedTree& t);
RootedTree tree_from_hierarchy(const Hierarchy& h);

enum class LabelMode { None, Event, Support };

RootedTree newick_parse(const std::string& text);
std::string newick_write(const RootedTree& t, LabelMode mode = LabelMode::None);

// Topology + leaf-label equality (isomorphism via canonical form).
bool same_tree(const RootedTree& a, const RootedTree& b);

// Topological restriction to the given leaves (extras in keep are ignored,
// an empty intersection is an error).
RootedTree restrict_tree(const RootedTree& t, const std::set<std::string>& keep);

}  // namespace pt
