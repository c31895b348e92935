#pragma once

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pt/ilp.hpp"
#include "pt/model.hpp"
#include "pt/triples.hpp"

namespace pt {

enum class TreeMode { MinVertices, MinTriples, BuildOnly };

struct SpeciesTreeResult {
    RootedTree tree;
    TreeMode mode = TreeMode::MinVertices;
    // inner-vertex count (min-vertices, build-only) or displayed-triple
    // count (min-triples) of the result
    double objective = 0.0;
    bool exact = true;
};

// Binary cluster matrix: |species| rows, |species|-2 candidate-cluster
// columns; all-zero columns are allowed and ignored when decoding.
struct ClusterMatrix {
    std::vector<std::string> species;          // sorted
    std::vector<std::vector<uint8_t>> cols;    // cols[p][row]
};

// Tree whose clusters are the non-trivial matrix columns plus singletons
// and the full species set. Throws with a gamete witness if two columns
// are incompatible.
RootedTree decode_matrix(const ClusterMatrix& m);

// Matrix formulation for the chosen mode (rejects build-only). Exposed so
// the CLI can export it without solving.
ilp::Model tree_model(const TripleSet& sstar, TreeMode mode);

// Least resolved species tree displaying sstar. BUILD runs first: a binary
// result is the unique answer for every mode; otherwise the matrix model
// is solved (build-only returns the BUILD tree as is).
SpeciesTreeResult least_resolved_tree(
    const TripleSet& sstar, TreeMode mode = TreeMode::MinVertices,
    std::chrono::duration<double> time_limit = std::chrono::minutes(30));

struct SupportReport {
    double s = 1.0;                        // whole-tree support
    std::map<int, double> per_vertex;      // inner vertex -> subtree support
    std::set<int> unsupported;             // inner vertices with no evidence
};

// Triple-frequency supports: the whole-tree value weighs the chosen subset
// against all observed orientations of its trios; per-vertex values do the
// same over the trios whose ingroup lies inside the subtree. Vertices with
// no observed orientation at all report 1 and are flagged. Also writes the
// values onto the tree's inner nodes.
SupportReport support_values(RootedTree& tree, const TripleSet& sstar,
                             const TripleSet& extracted);

}  // namespace pt
