#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pt/cograph.hpp"
#include "pt/model.hpp"

namespace pt {

struct SimConfig {
    size_t n_species = 10;
    std::optional<RootedTree> species_tree;  // overrides n_species when set
    size_t n_families = 100;
    double dup_rate = 1.0;
    double loss_rate = 0.5;
    double loss_increment = 0.1;  // added to a lineage's loss rate per duplication
    uint64_t seed = 1;
};

struct SimResult {
    RootedTree species_tree;
    std::vector<RootedTree> gene_trees;  // event-labeled, surviving genes only
    OrthologyEstimate orthology;         // exact: lca is a speciation
};

// Random binary tree by sequential uniform pair coalescence.
RootedTree random_yule_tree(std::mt19937_64& rng, const std::vector<std::string>& leaves);

// Gene families evolve along the species tree (every edge has length 1):
// per-lineage exponential waiting times for duplication and loss, loss rate
// growing additively after each duplication. Families that lose every gene
// are redrawn; persistent extinction is an error.
SimResult simulate(const SimConfig& cfg);

enum class NoiseModel {
    Homologous,   // flip any cross-species pair
    Orthologous,  // insert missing cross-species pairs
    Paralogous,   // delete present pairs
    Xenologous    // reassign gene species, edges untouched
};

struct NoiseSpec {
    NoiseModel model = NoiseModel::Homologous;
    double p = 0.0;
    uint64_t seed = 1;
};

OrthologyEstimate add_noise(const OrthologyEstimate& g, const NoiseSpec& spec);

struct Distances {
    double mc = 0.0;  // matching cluster
    double rf = 0.0;  // Robinson-Foulds
    double ns = 0.0;  // nodal splitted, L2
    double tt = 0.0;  // triple metric
};

struct DistanceReport {
    Distances raw;
    Distances normalized;
};

// Raw distances; both trees must share a leaf set.
Distances tree_distance(const RootedTree& t1, const RootedTree& t2);

// Monte-Carlo mean distances between independent Yule trees on n leaves,
// cached per (n, samples, seed).
Distances yule_normalizer(size_t n_leaves, size_t samples = 1000,
                          uint64_t seed = 9001);

// tree_distance divided per metric by the Yule constants.
DistanceReport compare_trees(const RootedTree& t1, const RootedTree& t2,
                             size_t samples = 1000, uint64_t seed = 9001);

// Tree of the clusters occurring in more than half of the inputs.
RootedTree majority_consensus(const std::vector<RootedTree>& trees);

}  // namespace pt
