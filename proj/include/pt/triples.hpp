#pragma once

#include <chrono>
#include <set>
#include <string>
#include <vector>

#include "pt/ilp.hpp"
#include "pt/model.hpp"

namespace pt {

// Species triples observed in one event-labeled gene tree: for every leaf
// trio from three distinct species whose displayed triple has a speciation
// at the trio's last common ancestor, the corresponding species triple is
// present (once per tree, regardless of multiplicity).
TripleSet extract_species_triples(const RootedTree& gene_tree, const SpeciesMap& sigma);

struct AhoGraph {
    std::vector<std::string> vertices;  // sorted
    std::set<std::pair<std::string, std::string>> edges;  // sorted pairs

    std::vector<std::vector<std::string>> components() const;
};

// Vertices s; an edge {x,y} for every (xy|z) in r with x,y,z all in s.
AhoGraph aho_graph(const TripleSet& r, const std::set<std::string>& s);

struct ConsistencyReport {
    bool consistent = false;
    RootedTree tree;                 // Aho tree, valid when consistent
    std::set<std::string> witness;   // connected vertex set when not
};

// BUILD: recursive partition by Aho-graph components. leaves must cover
// every leaf referenced by r.
ConsistencyReport build(const TripleSet& r, const std::set<std::string>& leaves);

// Refines every multifurcation into a caterpillar (children in canonical
// order), so the result is binary and displays a superset of the triples.
RootedTree refine_binary(const RootedTree& t);

// Triples displayed by every tree displaying r, by per-orientation
// consistency testing. Input must be consistent.
TripleSet closure(const TripleSet& r);

// Two-triple inference: the exhaustive rules for |L_r1 ∩ L_r2| = 2
// (empty result otherwise, and for any non-matching overlap pattern).
TripleSet infer_2order(const Triple& r1, const Triple& r2);

// Pairwise-closure consistency test for strictly dense sets: consistent
// iff the closure of every 2-element subset stays inside r. Throws if r
// is not strictly dense on its leaf universe.
bool strictly_dense_consistent(const TripleSet& r);

struct SubsetResult {
    TripleSet sstar;    // maximum-weight consistent subset of the input
    TripleSet sprime;   // strictly dense consistent superset orientations
    bool no_signal = false;  // fewer than 3 species
    bool exact = true;
};

// Selection model over all trios of the species universe: one variable per
// orientation (lexicographic trio order), exactly-one row per trio,
// inference-closure rows for all ordered 4-tuples, linking variables tying
// observed triples into the weighted objective.
ilp::Model subset_model(const TripleSet& s);

// Maximum-weight consistent subset S* of s, plus the strictly dense
// consistent orientation set S' it extends to. Consistent inputs shortcut
// through BUILD; otherwise the selection model is solved.
SubsetResult max_consistent_subset(
    const TripleSet& s,
    std::chrono::duration<double> time_limit = std::chrono::minutes(30));

}  // namespace pt
