#include "pt/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace pt {

void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    unsigned workers = std::min<size_t>(threads, n);
    std::exception_ptr err;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

namespace {

double secs_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RootedTree star_tree(const std::set<SpeciesId>& species) {
    RootedTree t;
    if (species.empty()) return t;
    std::vector<int> kids;
    for (const auto& s : species) kids.push_back(t.add_leaf(s));
    if (kids.size() == 1) {
        t.set_root(kids[0]);
    } else {
        t.set_root(t.add_inner(kids));
    }
    t.canonicalize();
    return t;
}

// subset + tree + supports on an already-extracted triple set
void resolve_into(PipelineResult& out, const PipelineConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    if (out.extracted.empty() || out.extracted.leaves().size() < 3) {
        out.no_signal = true;
        out.species_tree = star_tree(out.extracted.leaves());
        out.tree_result.tree = out.species_tree;
        out.tree_result.mode = cfg.tree_mode;
        out.tree_result.objective =
            static_cast<double>(out.species_tree.inner_vertices().size());
        if (out.species_tree.root() >= 0)
            out.support = support_values(out.species_tree, out.subset.sstar,
                                         out.extracted);
        return;
    }
    out.subset = max_consistent_subset(out.extracted, cfg.time_limit);
    out.timings.subset = secs_since(t0);

    t0 = std::chrono::steady_clock::now();
    out.tree_result = least_resolved_tree(out.subset.sstar, cfg.tree_mode,
                                          cfg.time_limit);
    out.species_tree = out.tree_result.tree;
    out.support = support_values(out.species_tree, out.subset.sstar, out.extracted);
    out.timings.tree = secs_since(t0);
}

}  // namespace

PipelineResult run_pipeline(const OrthologyEstimate& g, const PipelineConfig& cfg) {
    g.validate();
    PipelineResult out;
    std::vector<Component> comps = connected_components(g);

    auto t0 = std::chrono::steady_clock::now();
    out.edited.components.resize(comps.size());
    parallel_for(comps.size(), cfg.threads, [&](size_t i) {
        out.edited.components[i] =
            cograph_edit(comps[i], cfg.time_limit, cfg.component_limit);
    });
    for (const auto& c : out.edited.components) {
        out.edited.total_cost += c.cost;
        if (c.status != EditStatus::Optimal) out.edited.exact = false;
    }
    out.timings.edit = secs_since(t0);

    t0 = std::chrono::steady_clock::now();
    out.gene_trees.resize(comps.size());
    out.per_component.resize(comps.size());
    parallel_for(comps.size(), cfg.threads, [&](size_t i) {
        const EditedComponent& ec = out.edited.components[i];
        out.gene_trees[i] = cotree(ec.genes, ec.edges);
        SpeciesMap sigma;
        for (const auto& [gene, sp] : comps[i].species)
            sigma.gene_to_species[gene] = sp;
        out.per_component[i] = extract_species_triples(out.gene_trees[i], sigma);
    });
    for (const auto& sp : g.sigma.species()) out.extracted.add_leaf(sp);
    for (const auto& ts : out.per_component)
        for (const auto& [t, w] : ts.entries()) out.extracted.add(t, w);
    out.timings.extract = secs_since(t0);

    resolve_into(out, cfg);
    return out;
}

PipelineResult resolve_triples(const TripleSet& extracted, const PipelineConfig& cfg) {
    PipelineResult out;
    out.extracted = extracted;
    resolve_into(out, cfg);
    return out;
}

std::vector<RootedTree> bootstrap_trees(const PipelineResult& point,
                                        BootstrapScheme scheme, size_t replicates,
                                        const PipelineConfig& cfg) {
    std::vector<RootedTree> trees(replicates);
    const std::set<std::string>& all = point.extracted.leaves();

    parallel_for(replicates, cfg.threads, [&](size_t rep) {
        std::mt19937_64 rng(cfg.seed + rep);
        TripleSet sample;
        for (const auto& sp : all) sample.add_leaf(sp);
        if (scheme == BootstrapScheme::Components) {
            size_t m = point.per_component.size();
            for (size_t k = 0; k < m; ++k) {
                const TripleSet& ts = point.per_component[rng() % m];
                for (const auto& [t, w] : ts.entries()) sample.add(t, w);
            }
        } else {
            // each draw picks a triple with probability w / total
            std::vector<std::pair<Triple, double>> pool(
                point.extracted.entries().begin(), point.extracted.entries().end());
            double total = point.extracted.total_weight();
            size_t n = static_cast<size_t>(total + 0.5);
            for (size_t k = 0; k < n; ++k) {
                double u = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * total;
                double acc = 0;
                for (const auto& [t, w] : pool) {
                    acc += w;
                    if (u < acc || &t == &pool.back().first) {
                        sample.add(t, 1.0);
                        break;
                    }
                }
            }
        }
        PipelineConfig sub = cfg;
        sub.threads = 1;
        trees[rep] = resolve_triples(sample, sub).species_tree;
    });
    return trees;
}

}  // namespace pt
