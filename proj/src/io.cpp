#include "pt/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pt {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool skip(const std::string& line) { return line.empty() || line[0] == '#'; }

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

double parse_weight(const std::string& path, size_t ln, const std::string& s) {
    size_t used = 0;
    double w;
    try {
        w = std::stod(s, &used);
    } catch (const std::exception&) {
        throw IoError(path, ln, "bad weight '" + s + "'");
    }
    if (used != s.size()) throw IoError(path, ln, "bad weight '" + s + "'");
    return w;
}

std::string fmt_weight(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", w);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

SpeciesMap load_species_map(const std::string& path) {
    SpeciesMap sigma;
    auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        auto f = fields(lines[i]);
        if (f.size() != 2 || f[0].empty() || f[1].empty())
            throw IoError(path, i + 1, "expected gene<TAB>species");
        auto it = sigma.gene_to_species.find(f[0]);
        if (it != sigma.gene_to_species.end() && it->second != f[1])
            throw IoError(path, i + 1, "gene " + f[0] + " mapped to two species");
        sigma.gene_to_species[f[0]] = f[1];
    }
    if (sigma.gene_to_species.empty()) throw IoError(path + ": no mappings");
    return sigma;
}

void save_species_map(const std::string& path, const SpeciesMap& sigma) {
    auto out = open_out(path);
    for (const auto& [g, s] : sigma.gene_to_species) out << g << '\t' << s << '\n';
}

OrthologyEstimate load_orthology(const std::string& path, const SpeciesMap& sigma) {
    OrthologyEstimate g;
    g.sigma = sigma;
    for (const auto& [gene, sp] : sigma.gene_to_species) g.genes.insert(gene);
    auto lines = read_lines(path);
    std::set<GeneId> missing;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        auto f = fields(lines[i]);
        if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty())
            throw IoError(path, i + 1, "expected geneA<TAB>geneB[<TAB>weight]");
        if (f[0] == f[1]) throw IoError(path, i + 1, "self pair " + f[0]);
        for (int k = 0; k < 2; ++k)
            if (!sigma.contains(f[k])) missing.insert(f[k]);
        if (!missing.empty()) continue;
        double w = f.size() == 3 ? parse_weight(path, i + 1, f[2]) : 1.0;
        if (w < 0.0 || w > 1.0) throw IoError(path, i + 1, "weight outside [0,1]");
        GenePair p = gene_pair(f[0], f[1]);
        auto it = g.theta.find(p);
        if (it == g.theta.end() || it->second < w) g.theta[p] = w;
    }
    if (!missing.empty()) {
        std::string msg = path + ": genes missing from the species map:";
        for (const auto& m : missing) msg += " " + m;
        throw IoError(msg);
    }
    g.validate();
    return g;
}

void save_orthology(const std::string& path, const OrthologyEstimate& g) {
    auto out = open_out(path);
    for (const auto& [p, w] : g.theta)
        out << p.first << '\t' << p.second << '\t' << fmt_weight(w) << '\n';
}

TripleSet load_triples(const std::string& path) {
    TripleSet s;
    auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        auto f = fields(lines[i]);
        if (f.size() == 1 && !f[0].empty()) {
            s.add_leaf(f[0]);
            continue;
        }
        if (f.size() != 4 || f[0].empty() || f[1].empty() || f[2].empty())
            throw IoError(path, i + 1, "expected alpha<TAB>beta<TAB>gamma<TAB>weight");
        if (f[0] == f[1] || f[0] == f[2] || f[1] == f[2])
            throw IoError(path, i + 1, "triple needs three distinct species");
        double w = parse_weight(path, i + 1, f[3]);
        if (w < 0.0) throw IoError(path, i + 1, "negative weight");
        s.add(Triple::of(f[0], f[1], f[2]), w);
    }
    return s;
}

void save_triples(const std::string& path, const TripleSet& s) {
    auto out = open_out(path);
    std::set<std::string> covered;
    for (const auto& [t, w] : s.entries()) {
        out << t.a << '\t' << t.b << '\t' << t.z << '\t' << fmt_weight(w) << '\n';
        covered.insert(t.a);
        covered.insert(t.b);
        covered.insert(t.z);
    }
    for (const auto& l : s.leaves())
        if (covered.count(l) == 0) out << l << '\n';
}

std::vector<RootedTree> load_trees(const std::string& path) {
    std::vector<RootedTree> trees;
    auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        try {
            trees.push_back(newick_parse(lines[i]));
        } catch (const ParseError& e) {
            throw IoError(path, i + 1, e.what());
        }
    }
    return trees;
}

void save_trees(const std::string& path, const std::vector<RootedTree>& trees,
                LabelMode mode) {
    auto out = open_out(path);
    for (const auto& t : trees) out << newick_write(t, mode) << '\n';
}

void save_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

}  // namespace pt
