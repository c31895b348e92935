#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pt/cograph.hpp"
#include "pt/model.hpp"
#include "pt/sim_eval.hpp"
#include "pt/species_tree.hpp"
#include "pt/triples.hpp"

namespace pt {

struct PipelineConfig {
    size_t component_limit = 50;
    std::chrono::duration<double> time_limit = std::chrono::minutes(30);
    TreeMode tree_mode = TreeMode::MinVertices;
    unsigned threads = 1;
    uint64_t seed = 1;
};

struct StageTimings {
    double edit = 0, extract = 0, subset = 0, tree = 0;
};

struct PipelineResult {
    EditedCograph edited;
    std::vector<RootedTree> gene_trees;          // cotrees, component order
    std::vector<TripleSet> per_component;        // species triples per component
    TripleSet extracted;                         // merged, component-count weights
    SubsetResult subset;
    SpeciesTreeResult tree_result;
    SupportReport support;
    RootedTree species_tree;                     // support-annotated
    bool no_signal = false;                      // zero triples -> star tree
    StageTimings timings;
};

// components -> edit -> cotrees -> extract -> max consistent subset ->
// least resolved tree -> supports. Deterministic for any thread count.
PipelineResult run_pipeline(const OrthologyEstimate& g, const PipelineConfig& cfg);

// Subset + tree stages only, for data that is already a triple set.
PipelineResult resolve_triples(const TripleSet& extracted, const PipelineConfig& cfg);

enum class BootstrapScheme { Components, Triples };

// Replicate species trees, ordered by replicate index; replicate i draws
// from seed + i. Components scheme resamples whole gene-family components
// with repetition, triples scheme redraws triples by relative weight.
std::vector<RootedTree> bootstrap_trees(const PipelineResult& point,
                                        BootstrapScheme scheme, size_t replicates,
                                        const PipelineConfig& cfg);

// Runs fn(0..n-1) on cfg-many workers; any schedule gives the same result
// as long as fn(i) only touches slot i.
void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn);

}  // namespace pt
