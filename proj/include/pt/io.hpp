#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pt/cograph.hpp"
#include "pt/model.hpp"

namespace pt {

// Input problems carry the file and line they came from.
class IoError : public std::runtime_error {
  public:
    IoError(const std::string& path, size_t line, const std::string& msg)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// gene<TAB>species, one per line, '#' starts a comment.
SpeciesMap load_species_map(const std::string& path);
void save_species_map(const std::string& path, const SpeciesMap& sigma);

// geneA<TAB>geneB[<TAB>weight], undirected, duplicates keep the maximum
// weight, self pairs rejected. Every mapped gene becomes a vertex, so genes
// without edges survive the round trip. Unmapped genes are an error.
OrthologyEstimate load_orthology(const std::string& path, const SpeciesMap& sigma);
void save_orthology(const std::string& path, const OrthologyEstimate& g);

// alpha<TAB>beta<TAB>gamma<TAB>weight per triple (alpha beta | gamma);
// single-column rows declare leaves that appear in no triple.
TripleSet load_triples(const std::string& path);
void save_triples(const std::string& path, const TripleSet& s);

// One Newick string per line.
std::vector<RootedTree> load_trees(const std::string& path);
void save_trees(const std::string& path, const std::vector<RootedTree>& trees,
                LabelMode mode = LabelMode::None);

void save_text(const std::string& path, const std::string& text);

}  // namespace pt
