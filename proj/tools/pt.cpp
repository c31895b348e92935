#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "pt/io.hpp"
#include "pt/pipeline.hpp"

using json = nlohmann::ordered_json;
using namespace pt;

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string orthology, species_map, out = ".";
    unsigned threads = 1;
    uint64_t seed = 1;
    size_t component_limit = 50;
    double time_limit_secs = 1800;
    std::string tree_mode = "min-vertices";
    std::string solver = "builtin";
    std::string bootstrap = "none";
    size_t replicates = 100;
};

void add_common(CLI::App* cmd, Options& o, bool with_inputs) {
    if (with_inputs) {
        cmd->add_option("--orthology", o.orthology, "orthology TSV")
            ->required()
            ->envname("PT_ORTHOLOGY");
        cmd->add_option("--species-map", o.species_map, "gene-to-species TSV")
            ->required()
            ->envname("PT_SPECIES_MAP");
    }
    cmd->add_option("--out", o.out, "output directory")->envname("PT_OUT");
    cmd->add_option("--threads", o.threads, "worker threads")->envname("PT_THREADS");
    cmd->add_option("--seed", o.seed, "master seed")->envname("PT_SEED");
    cmd->add_option("--component-limit", o.component_limit,
                    "max genes per exactly edited component")
        ->envname("PT_COMPONENT_LIMIT");
    cmd->add_option("--time-limit-secs", o.time_limit_secs, "per-model solver limit")
        ->envname("PT_TIME_LIMIT_SECS");
    cmd->add_option("--tree-mode", o.tree_mode, "min-vertices|min-triples|build")
        ->check(CLI::IsMember({"min-vertices", "min-triples", "build"}))
        ->envname("PT_TREE_MODE");
    cmd->add_option("--solver", o.solver, "builtin|export-only")
        ->check(CLI::IsMember({"builtin", "export-only"}))
        ->envname("PT_SOLVER");
}

PipelineConfig to_config(const Options& o) {
    PipelineConfig cfg;
    cfg.component_limit = o.component_limit;
    cfg.time_limit = std::chrono::duration<double>(o.time_limit_secs);
    cfg.threads = o.threads;
    cfg.seed = o.seed;
    if (o.tree_mode == "min-triples")
        cfg.tree_mode = TreeMode::MinTriples;
    else if (o.tree_mode == "build")
        cfg.tree_mode = TreeMode::BuildOnly;
    return cfg;
}

std::string out_path(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    return (fs::path(o.out) / name).string();
}

OrthologyEstimate edited_estimate(const OrthologyEstimate& g,
                                  const EditedCograph& edited) {
    OrthologyEstimate e;
    e.genes = g.genes;
    e.sigma = g.sigma;
    for (const auto& comp : edited.components)
        for (const auto& p : comp.edges) e.theta[p] = 1.0;
    return e;
}

void export_edit_models(const OrthologyEstimate& g, const Options& o) {
    auto comps = connected_components(g);
    size_t written = 0;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (comps[i].genes.size() < 4) continue;
        char name[48];
        std::snprintf(name, sizeof name, "edit_component_%04zu.lp", i);
        save_text(out_path(o, name), ilp::export_lp(editing_model(comps[i])));
        ++written;
    }
    std::cout << "wrote " << written << " editing models to " << o.out << "\n";
}

json support_json(const RootedTree& t, const SupportReport& rep) {
    json vertices = json::array();
    for (const auto& [v, val] : rep.per_vertex) {
        std::string clade;
        for (const auto& l : t.leaf_set(v)) {
            if (!clade.empty()) clade += ",";
            clade += l;
        }
        vertices.push_back({{"clade", clade},
                            {"support", val},
                            {"unsupported", rep.unsupported.count(v) > 0}});
    }
    return {{"s", rep.s}, {"vertices", vertices}};
}

const char* status_name(EditStatus s) {
    switch (s) {
        case EditStatus::Optimal: return "optimal";
        case EditStatus::TimeLimitedIncumbent: return "time-limited";
        default: return "skipped-too-large";
    }
}

json report_json(const OrthologyEstimate& g, const PipelineResult& r,
                 const Options& o) {
    json statuses = json::array();
    for (const auto& c : r.edited.components) statuses.push_back(status_name(c.status));
    json rep = {
        {"seed", o.seed},
        {"threads", o.threads},
        {"tree_mode", o.tree_mode},
        {"n_genes", g.genes.size()},
        {"n_species", g.sigma.species().size()},
        {"n_components", r.edited.components.size()},
        {"editing",
         {{"cost", r.edited.total_cost},
          {"exact", r.edited.exact},
          {"component_status", statuses}}},
        {"extraction",
         {{"n_triples", r.extracted.size()},
          {"total_weight", r.extracted.total_weight()}}},
        {"subset",
         {{"kept", r.subset.sstar.size()},
          {"kept_weight", r.subset.sstar.total_weight()},
          {"exact", r.subset.exact}}},
        {"tree",
         {{"objective", r.tree_result.objective},
          {"exact", r.tree_result.exact},
          {"newick", newick_write(r.species_tree, LabelMode::Support)}}},
        {"support", support_json(r.species_tree, r.support)},
        {"no_signal", r.no_signal},
    };
    rep["timings"] = {{"edit_secs", r.timings.edit},
                      {"extract_secs", r.timings.extract},
                      {"subset_secs", r.timings.subset},
                      {"tree_secs", r.timings.tree}};
    return rep;
}

void write_point_artifacts(const OrthologyEstimate& g, const PipelineResult& r,
                           const Options& o) {
    save_orthology(out_path(o, "edited.tsv"), edited_estimate(g, r.edited));
    save_trees(out_path(o, "gene_trees.nwk"), r.gene_trees, LabelMode::Event);
    save_triples(out_path(o, "triples.tsv"), r.extracted);
    save_triples(out_path(o, "sstar.tsv"), r.subset.sstar);
    save_text(out_path(o, "species_tree.nwk"),
              newick_write(r.species_tree, LabelMode::Support) + "\n");
}

int cmd_edit(const Options& o) {
    OrthologyEstimate g = load_orthology(o.orthology, load_species_map(o.species_map));
    if (o.solver == "export-only") {
        export_edit_models(g, o);
        return 0;
    }
    PipelineConfig cfg = to_config(o);
    auto comps = connected_components(g);
    EditedCograph edited;
    edited.components.resize(comps.size());
    parallel_for(comps.size(), cfg.threads, [&](size_t i) {
        edited.components[i] = cograph_edit(comps[i], cfg.time_limit,
                                            cfg.component_limit);
    });
    std::vector<RootedTree> cotrees(comps.size());
    for (size_t i = 0; i < comps.size(); ++i) {
        edited.total_cost += edited.components[i].cost;
        if (edited.components[i].status != EditStatus::Optimal) edited.exact = false;
        cotrees[i] = cotree(edited.components[i].genes, edited.components[i].edges);
    }
    save_orthology(out_path(o, "edited.tsv"), edited_estimate(g, edited));
    save_trees(out_path(o, "gene_trees.nwk"), cotrees, LabelMode::Event);
    std::cout << "components: " << comps.size() << "  edit cost: "
              << edited.total_cost << (edited.exact ? "" : "  (not exact)") << "\n";
    return 0;
}

int cmd_extract(const Options& o) {
    OrthologyEstimate g = load_orthology(o.orthology, load_species_map(o.species_map));
    PipelineConfig cfg = to_config(o);
    auto comps = connected_components(g);
    std::vector<TripleSet> per(comps.size());
    parallel_for(comps.size(), cfg.threads, [&](size_t i) {
        RootedTree ct = cotree(comps[i].genes, comps[i].estimated_edges());
        SpeciesMap sigma;
        for (const auto& [gene, sp] : comps[i].species)
            sigma.gene_to_species[gene] = sp;
        per[i] = extract_species_triples(ct, sigma);
    });
    TripleSet merged;
    for (const auto& sp : g.sigma.species()) merged.add_leaf(sp);
    for (const auto& ts : per)
        for (const auto& [t, w] : ts.entries()) merged.add(t, w);
    save_triples(out_path(o, "triples.tsv"), merged);
    std::cout << merged.size() << " species triples\n";
    return 0;
}

int cmd_subset(const Options& o, const std::string& triples_path) {
    TripleSet s = load_triples(triples_path);
    if (o.solver == "export-only") {
        save_text(out_path(o, "subset.lp"), ilp::export_lp(subset_model(s)));
        std::cout << "wrote subset model to " << o.out << "\n";
        return 0;
    }
    SubsetResult r = max_consistent_subset(
        s, std::chrono::duration<double>(o.time_limit_secs));
    save_triples(out_path(o, "sstar.tsv"), r.sstar);
    std::cout << "kept " << r.sstar.size() << " of " << s.size() << " triples"
              << (r.exact ? "" : "  (not exact)") << "\n";
    return 0;
}

int cmd_tree(const Options& o, const std::string& triples_path) {
    TripleSet s = load_triples(triples_path);
    PipelineConfig cfg = to_config(o);
    if (o.solver == "export-only") {
        if (cfg.tree_mode == TreeMode::BuildOnly)
            throw std::runtime_error("build mode has no model to export");
        save_text(out_path(o, "tree.lp"), ilp::export_lp(tree_model(s, cfg.tree_mode)));
        std::cout << "wrote tree model to " << o.out << "\n";
        return 0;
    }
    PipelineResult r = resolve_triples(s, cfg);
    save_text(out_path(o, "species_tree.nwk"),
              newick_write(r.species_tree, LabelMode::Support) + "\n");
    std::cout << newick_write(r.species_tree) << "\n";
    return r.no_signal ? 2 : 0;
}

int cmd_run(const Options& o) {
    OrthologyEstimate g = load_orthology(o.orthology, load_species_map(o.species_map));
    if (o.solver == "export-only") {
        export_edit_models(g, o);
        std::cout << "export-only: later stage models come from the subset/tree "
                     "subcommands once their inputs exist\n";
        return 0;
    }
    PipelineConfig cfg = to_config(o);
    PipelineResult r = run_pipeline(g, cfg);
    write_point_artifacts(g, r, o);
    json rep = report_json(g, r, o);
    if (o.bootstrap != "none") {
        BootstrapScheme scheme = o.bootstrap == "components"
                                     ? BootstrapScheme::Components
                                     : BootstrapScheme::Triples;
        std::vector<RootedTree> reps = bootstrap_trees(r, scheme, o.replicates, cfg);
        save_trees(out_path(o, "bootstrap_trees.nwk"), reps);
        RootedTree cons = majority_consensus(reps);
        save_text(out_path(o, "consensus.nwk"), newick_write(cons) + "\n");
        rep["bootstrap"] = {{"scheme", o.bootstrap},
                            {"replicates", o.replicates},
                            {"consensus", newick_write(cons)}};
    }
    save_text(out_path(o, "report.json"), rep.dump(2) + "\n");
    if (r.no_signal) {
        std::cerr << "warning: no species triples; emitting a star tree\n";
        return 2;
    }
    std::cout << newick_write(r.species_tree, LabelMode::Support) << "\n";
    return 0;
}

int cmd_bootstrap(const Options& o) {
    OrthologyEstimate g = load_orthology(o.orthology, load_species_map(o.species_map));
    PipelineConfig cfg = to_config(o);
    PipelineResult r = run_pipeline(g, cfg);
    BootstrapScheme scheme = o.bootstrap == "triples" ? BootstrapScheme::Triples
                                                      : BootstrapScheme::Components;
    std::vector<RootedTree> reps = bootstrap_trees(r, scheme, o.replicates, cfg);
    save_trees(out_path(o, "bootstrap_trees.nwk"), reps);
    RootedTree cons = majority_consensus(reps);
    save_text(out_path(o, "consensus.nwk"), newick_write(cons) + "\n");
    std::cout << newick_write(cons) << "\n";
    return 0;
}

struct SimOptions {
    size_t species = 10, families = 100;
    double dup_rate = 1.0, loss_rate = 0.5, loss_increment = 0.1;
    std::string noise_model = "none";
    double noise_p = 0.0;
};

NoiseModel parse_noise(const std::string& name) {
    if (name == "homologous") return NoiseModel::Homologous;
    if (name == "orthologous") return NoiseModel::Orthologous;
    if (name == "paralogous") return NoiseModel::Paralogous;
    return NoiseModel::Xenologous;
}

void add_sim(CLI::App* cmd, SimOptions& s) {
    cmd->add_option("--species", s.species, "species count");
    cmd->add_option("--families", s.families, "gene family count");
    cmd->add_option("--dup-rate", s.dup_rate, "duplication rate per edge");
    cmd->add_option("--loss-rate", s.loss_rate, "base loss rate per edge");
    cmd->add_option("--loss-increment", s.loss_increment,
                    "loss-rate bump after a duplication");
    cmd->add_option("--noise-model", s.noise_model,
                    "none|homologous|orthologous|paralogous|xenologous")
        ->check(CLI::IsMember({"none", "homologous", "orthologous", "paralogous",
                               "xenologous"}));
    cmd->add_option("--noise-p", s.noise_p, "noise probability")
        ->check(CLI::Range(0.0, 1.0));
}

int cmd_simulate(const Options& o, const SimOptions& s) {
    SimConfig cfg;
    cfg.n_species = s.species;
    cfg.n_families = s.families;
    cfg.dup_rate = s.dup_rate;
    cfg.loss_rate = s.loss_rate;
    cfg.loss_increment = s.loss_increment;
    cfg.seed = o.seed;
    SimResult r = simulate(cfg);
    save_text(out_path(o, "true_tree.nwk"), newick_write(r.species_tree) + "\n");
    save_trees(out_path(o, "gene_trees.nwk"), r.gene_trees, LabelMode::Event);
    for (size_t i = 0; i < r.gene_trees.size(); ++i) {
        OrthologyEstimate fam;
        fam.sigma = r.orthology.sigma;
        auto genes = r.gene_trees[i].leaf_labels();
        for (const auto& a : genes)
            for (const auto& b : genes) {
                if (a >= b) continue;
                double w = r.orthology.weight(a, b);
                if (w > 0) fam.theta[gene_pair(a, b)] = w;
            }
        char name[32];
        std::snprintf(name, sizeof name, "family_%04zu.tsv", i + 1);
        save_orthology(out_path(o, name), fam);
    }
    OrthologyEstimate final = r.orthology;
    if (s.noise_model != "none")
        final = add_noise(final, {parse_noise(s.noise_model), s.noise_p, o.seed + 7});
    save_orthology(out_path(o, "orthology.tsv"), final);
    save_species_map(out_path(o, "species_map.tsv"), final.sigma);
    std::cout << r.gene_trees.size() << " families, "
              << r.orthology.genes.size() << " genes\n";
    return 0;
}

int cmd_distance(const Options& o, const std::string& p1, const std::string& p2,
                 size_t samples) {
    auto t1 = load_trees(p1);
    auto t2 = load_trees(p2);
    if (t1.size() != 1 || t2.size() != 1)
        throw std::runtime_error("each tree file must hold exactly one tree");
    DistanceReport d = compare_trees(t1[0], t2[0], samples);
    std::ostringstream out;
    char buf[96];
    auto row = [&](const char* name, double raw, double norm) {
        std::snprintf(buf, sizeof buf, "%s\t%.10g\t%.10g\n", name, raw, norm);
        out << buf;
    };
    row("MC", d.raw.mc, d.normalized.mc);
    row("RF", d.raw.rf, d.normalized.rf);
    row("NS", d.raw.ns, d.normalized.ns);
    row("TT", d.raw.tt, d.normalized.tt);
    std::cout << out.str();
    save_text(out_path(o, "distance.tsv"), out.str());
    return 0;
}

int cmd_experiment(const Options& o, const SimOptions& s, size_t reps) {
    PipelineConfig cfg = to_config(o);
    std::ostringstream out;
    out << "species\tfamilies\tmodel\tp\trep\tmetric\traw\tnormalized\n";
    for (size_t rep = 0; rep < reps; ++rep) {
        SimConfig sim;
        sim.n_species = s.species;
        sim.n_families = s.families;
        sim.dup_rate = s.dup_rate;
        sim.loss_rate = s.loss_rate;
        sim.loss_increment = s.loss_increment;
        sim.seed = o.seed + rep;
        SimResult data = simulate(sim);
        OrthologyEstimate input = data.orthology;
        if (s.noise_model != "none")
            input = add_noise(input,
                              {parse_noise(s.noise_model), s.noise_p, sim.seed + 7});
        PipelineResult r = run_pipeline(input, cfg);
        // species without surviving genes drop out of the reconstruction
        std::vector<std::string> present = r.species_tree.leaf_labels();
        RootedTree truth = restrict_tree(
            data.species_tree, std::set<std::string>(present.begin(), present.end()));
        DistanceReport d;
        if (truth.leaf_labels().size() >= 4) {
            d = compare_trees(truth, r.species_tree);
        } else {
            d.raw = tree_distance(truth, r.species_tree);
            d.normalized = d.raw;  // no Yule constants below 4 leaves
        }
        auto row = [&](const char* name, double raw, double norm) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%zu\t%zu\t%s\t%g\t%zu\t%s\t%.10g\t%.10g\n",
                          s.species, s.families, s.noise_model.c_str(), s.noise_p,
                          rep, name, raw, norm);
            out << buf;
        };
        row("MC", d.raw.mc, d.normalized.mc);
        row("RF", d.raw.rf, d.normalized.rf);
        row("NS", d.raw.ns, d.normalized.ns);
        row("TT", d.raw.tt, d.normalized.tt);
    }
    save_text(out_path(o, "experiment.tsv"), out.str());
    std::cout << "wrote " << out_path(o, "experiment.tsv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"species trees from estimated gene orthology"};
    app.require_subcommand(1);
    Options o;

    auto* edit = app.add_subcommand("edit", "edit the relation into cographs");
    add_common(edit, o, true);

    auto* extract = app.add_subcommand("extract", "species triples from cotrees");
    add_common(extract, o, true);

    std::string triples_path;
    auto* subset = app.add_subcommand("subset", "maximum consistent triple subset");
    subset->add_option("--triples", triples_path, "species triples TSV")->required();
    add_common(subset, o, false);

    auto* tree = app.add_subcommand("tree", "least resolved species tree");
    tree->add_option("--triples", triples_path, "species triples TSV")->required();
    add_common(tree, o, false);

    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, o, true);
    run->add_option("--bootstrap", o.bootstrap, "none|components|triples")
        ->check(CLI::IsMember({"none", "components", "triples"}))
        ->envname("PT_BOOTSTRAP");
    run->add_option("--replicates", o.replicates, "bootstrap replicates")
        ->envname("PT_REPLICATES");

    auto* boot = app.add_subcommand("bootstrap", "bootstrap replicate trees");
    add_common(boot, o, true);
    boot->add_option("--bootstrap", o.bootstrap, "components|triples")
        ->check(CLI::IsMember({"components", "triples"}))
        ->envname("PT_BOOTSTRAP");
    boot->add_option("--replicates", o.replicates, "bootstrap replicates")
        ->envname("PT_REPLICATES");

    SimOptions s;
    auto* sim = app.add_subcommand("simulate", "duplication/loss families");
    add_common(sim, o, false);
    add_sim(sim, s);

    std::string tree1, tree2;
    size_t samples = 1000;
    auto* dist = app.add_subcommand("distance", "rooted tree distances");
    dist->add_option("--tree1", tree1, "Newick file")->required();
    dist->add_option("--tree2", tree2, "Newick file")->required();
    dist->add_option("--samples", samples, "Yule normalization samples");
    add_common(dist, o, false);

    size_t reps = 20;
    auto* exp = app.add_subcommand("experiment", "simulate, reconstruct, measure");
    add_common(exp, o, false);
    add_sim(exp, s);
    exp->add_option("--reps", reps, "repetitions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (edit->parsed()) return cmd_edit(o);
        if (extract->parsed()) return cmd_extract(o);
        if (subset->parsed()) return cmd_subset(o, triples_path);
        if (tree->parsed()) return cmd_tree(o, triples_path);
        if (run->parsed()) return cmd_run(o);
        if (boot->parsed()) return cmd_bootstrap(o);
        if (sim->parsed()) return cmd_simulate(o, s);
        if (dist->parsed()) return cmd_distance(o, tree1, tree2, samples);
        if (exp->parsed()) return cmd_experiment(o, s, reps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
