#pragma once

#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pt/model.hpp"

namespace pth {

inline size_t rnd_below(std::mt19937_64& rng, size_t n) {
    return static_cast<size_t>(rng() % n);
}

inline double rnd_unit(std::mt19937_64& rng) {
    return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline std::vector<std::string> letters(size_t n) {
    std::vector<std::string> out;
    for (size_t i = 0; i < n; ++i) {
        if (i < 26)
            out.push_back(std::string(1, static_cast<char>('a' + i)));
        else
            out.push_back("a" + std::to_string(i));
    }
    return out;
}

// Random rooted phylogenetic tree over the given leaf labels: random binary
// merge order, then each inner cluster is dropped with probability contract_p
// (contracting its edge), so contract_p = 0 gives a binary tree.
inline pt::RootedTree random_tree(std::mt19937_64& rng,
                                  const std::vector<std::string>& labels,
                                  double contract_p = 0.0) {
    std::set<std::string> universe(labels.begin(), labels.end());
    pt::Hierarchy h(universe);
    std::vector<std::set<std::string>> parts;
    for (const auto& l : labels) parts.push_back({l});
    while (parts.size() > 1) {
        size_t i = rnd_below(rng, parts.size());
        size_t j = rnd_below(rng, parts.size() - 1);
        if (j >= i) ++j;
        std::set<std::string> merged = parts[i];
        merged.insert(parts[j].begin(), parts[j].end());
        if (merged.size() < universe.size() && rnd_unit(rng) >= contract_p)
            h.insert(merged);
        if (i < j) std::swap(i, j);
        parts.erase(parts.begin() + i);
        parts[j] = std::move(merged);
    }
    return pt::tree_from_hierarchy(h);
}

// All set partitions of items into at least two blocks.
inline void partitions(const std::vector<std::string>& items,
                       std::vector<std::vector<std::set<std::string>>>& out) {
    std::vector<int> block(items.size(), 0);
    std::function<void(size_t, int)> rec = [&](size_t i, int maxb) {
        if (i == items.size()) {
            if (maxb < 1) return;  // need >= 2 blocks
            std::vector<std::set<std::string>> p(maxb + 1);
            for (size_t j = 0; j < items.size(); ++j) p[block[j]].insert(items[j]);
            out.push_back(std::move(p));
            return;
        }
        for (int b = 0; b <= maxb + 1; ++b) {
            block[i] = b;
            rec(i + 1, std::max(maxb, b));
        }
    };
    rec(0, -1);
}

// Every rooted phylogenetic tree on the leaf set, as hierarchies.
inline std::vector<std::set<std::set<std::string>>> all_hierarchies(
    const std::set<std::string>& leaves) {
    if (leaves.size() == 1) return {{{*leaves.begin()}}};
    std::vector<std::set<std::set<std::string>>> out;
    std::vector<std::string> items(leaves.begin(), leaves.end());
    std::vector<std::vector<std::set<std::string>>> parts;
    partitions(items, parts);
    for (const auto& p : parts) {
        std::vector<std::vector<std::set<std::set<std::string>>>> sub;
        for (const auto& blockset : p) sub.push_back(all_hierarchies(blockset));
        std::vector<size_t> pick(sub.size(), 0);
        while (true) {
            std::set<std::set<std::string>> h{leaves};
            for (size_t i = 0; i < sub.size(); ++i)
                h.insert(sub[i][pick[i]].begin(), sub[i][pick[i]].end());
            out.push_back(std::move(h));
            size_t i = 0;
            while (i < pick.size() && ++pick[i] == sub[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
    }
    return out;
}

inline std::vector<pt::RootedTree> all_trees(const std::set<std::string>& leaves) {
    std::vector<pt::RootedTree> out;
    for (const auto& clusters : all_hierarchies(leaves)) {
        pt::Hierarchy h(leaves);
        for (const auto& c : clusters) h.insert(c);
        out.push_back(pt::tree_from_hierarchy(h));
    }
    return out;
}

}  // namespace pth
