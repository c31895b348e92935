#pragma once

#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pt/ilp.hpp"
#include "pt/model.hpp"

namespace pt {

using GenePair = std::pair<GeneId, GeneId>;

inline GenePair gene_pair(const GeneId& x, const GeneId& y) {
    return x < y ? GenePair{x, y} : GenePair{y, x};
}

// Pairs at or above this weight count as estimated orthologs wherever a
// binary view of the relation is needed (components, edit deltas). The
// editing objective itself uses the raw weights.
inline constexpr double kOrthologyThreshold = 0.5;

// Symmetric irreflexive weighted relation over genes, plus the
// gene-to-species assignment.
struct OrthologyEstimate {
    std::set<GeneId> genes;
    std::map<GenePair, double> theta;  // absent pair reads as 0
    SpeciesMap sigma;

    double weight(const GeneId& x, const GeneId& y) const;
    // Adds both genes; weight must lie in [0,1], genes distinct.
    void set_weight(const GeneId& x, const GeneId& y, double w);
    // Every gene must be mapped to a species.
    void validate() const;
};

struct Component {
    std::vector<GeneId> genes;          // sorted
    std::map<GenePair, double> theta;   // raw weights among these genes
    std::map<GeneId, SpeciesId> species;

    std::set<GenePair> estimated_edges() const;  // thresholded view
};

// Partition by connectivity under the thresholded relation; sorted by
// smallest gene id.
std::vector<Component> connected_components(const OrthologyEstimate& g);

// Some induced path w-x-y-z if one exists (deterministic pick), else none.
// A graph is a cograph iff this returns none.
std::optional<std::array<GeneId, 4>> find_p4(const std::vector<GeneId>& genes,
                                             const std::set<GenePair>& edges);

enum class EditStatus { Optimal, TimeLimitedIncumbent, SkippedTooLarge };

struct EditedComponent {
    std::vector<GeneId> genes;
    std::set<GenePair> edges;   // edited edge set, P4-free, no same-species edge
    double cost = 0.0;          // weighted symmetric difference to the input
    std::vector<GenePair> inserted, deleted;  // vs the thresholded input
    EditStatus status = EditStatus::Optimal;
};

struct EditedCograph {
    std::vector<EditedComponent> components;
    double total_cost = 0.0;
    bool exact = true;  // false if any component hit a limit
};

// Exact editing model: one binary variable per unordered gene pair (sorted
// order), same-species pairs fixed to 0, one row per induced-P4 ordering of
// every 4-subset (12 per subset after dropping reversals). Exposed so the
// CLI can export it without solving.
ilp::Model editing_model(const Component& c);

// Minimum-cost edit of one component into a P4-free graph with no
// same-species edge. Components larger than size_limit are not solved
// exactly: the thresholded input is pruned of same-species edges and P4s
// are destroyed greedily (middle edge deleted) instead.
EditedComponent cograph_edit(
    const Component& c,
    std::chrono::duration<double> time_limit = std::chrono::minutes(30),
    size_t size_limit = 50);

// Weighted symmetric difference between the raw relation and an edge set.
double edit_cost(const Component& c, const std::set<GenePair>& edges);

class NotCographError : public std::runtime_error {
  public:
    NotCographError(const std::string& msg, std::array<GeneId, 4> witness)
        : std::runtime_error(msg), witness_(std::move(witness)) {}
    const std::array<GeneId, 4>& witness() const { return witness_; }

  private:
    std::array<GeneId, 4> witness_;
};

// Canonical cotree of a cograph as an event-labeled tree: join vertices
// are speciations, union vertices duplications. Throws with a P4 witness
// if the input is not a cograph.
RootedTree cotree(const std::vector<GeneId>& genes, const std::set<GenePair>& edges);

}  // namespace pt
