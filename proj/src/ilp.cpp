#include "pt/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace pt::ilp {

namespace {
constexpr double kEps = 1e-9;
}

int Model::add_var(const std::string& name) {
    if (name.empty()) throw std::runtime_error("empty variable name");
    names_.push_back(name);
    return static_cast<int>(names_.size()) - 1;
}

void Model::check_terms(const std::vector<Term>& terms) const {
    for (const auto& t : terms) {
        if (t.var < 0 || t.var >= num_vars())
            throw std::runtime_error("constraint references undeclared variable");
        if (!std::isfinite(t.coef))
            throw std::runtime_error("non-finite coefficient");
    }
}

void Model::add_constraint(std::vector<Term> terms, Cmp cmp, double rhs) {
    if (terms.empty()) throw std::runtime_error("constraint with no terms");
    if (!std::isfinite(rhs)) throw std::runtime_error("non-finite right-hand side");
    check_terms(terms);
    rows_.push_back(Constraint{std::move(terms), cmp, rhs});
}

void Model::set_objective(bool maximize, std::vector<Term> terms) {
    check_terms(terms);
    maximize_ = maximize;
    obj_ = std::move(terms);
}

void Model::fix(int var, int value) {
    add_constraint({{var, 1.0}}, Cmp::EQ, static_cast<double>(value));
}

namespace {

// Normalized row: LE or EQ only (GE rows are negated at setup).
struct Row {
    std::vector<Term> terms;
    bool eq;
    double rhs;
    // running sums over the current partial assignment
    double fixed = 0.0;
    double pos_un = 0.0;  // positive coefs of unassigned vars
    double neg_un = 0.0;  // negative coefs of unassigned vars
};

class Solver {
  public:
    explicit Solver(const Model& m) : m_(m) {
        int n = m.num_vars();
        assign_.assign(n, -1);
        adj_.resize(n);
        for (const auto& c : m.constraints()) {
            Row r;
            r.eq = (c.cmp == Cmp::EQ);
            r.rhs = c.rhs;
            double flip = (c.cmp == Cmp::GE) ? -1.0 : 1.0;
            if (c.cmp == Cmp::GE) r.rhs = -c.rhs;
            for (const auto& t : c.terms) r.terms.push_back({t.var, t.coef * flip});
            for (const auto& t : r.terms) {
                if (t.coef > 0) r.pos_un += t.coef;
                else r.neg_un += t.coef;
            }
            int idx = static_cast<int>(rows_.size());
            for (const auto& t : r.terms) adj_[t.var].push_back({idx, t.coef});
            rows_.push_back(std::move(r));
        }
        obj_coef_.assign(n, 0.0);
        for (const auto& t : m.objective()) obj_coef_[t.var] += t.coef;
        for (int v = 0; v < n; ++v) {
            if (obj_coef_[v] > 0) obj_pos_un_ += obj_coef_[v];
            else obj_neg_un_ += obj_coef_[v];
        }
        detect_groups();
        in_queue_.assign(rows_.size(), false);
    }

    Outcome run(std::chrono::duration<double> limit) {
        auto t0 = std::chrono::steady_clock::now();
        deadline_ok_ = true;
        limit_ = limit;
        start_ = t0;
        Outcome out;
        bool root_ok = true;
        for (size_t i = 0; i < rows_.size() && root_ok; ++i) {
            queue_.push_back(static_cast<int>(i));
            in_queue_[i] = true;
        }
        if (!propagate()) root_ok = false;
        if (root_ok) dfs();
        out.nodes = nodes_;
        out.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (has_incumbent_) {
            out.status = deadline_ok_ ? Status::Optimal : Status::FeasibleIncumbent;
            out.assignment = best_;
            out.objective = best_obj_;
        } else {
            out.status = deadline_ok_ ? Status::Infeasible : Status::TimeoutNoIncumbent;
        }
        return out;
    }

  private:
    void detect_groups() {
        // "exactly one of" rows sharpen the objective bound: at most one
        // member contributes, so the group counts once, not per variable.
        group_of_.assign(assign_.size(), -1);
        for (const auto& r : rows_) {
            if (!r.eq || std::abs(r.rhs - 1.0) > kEps || r.terms.size() < 2) continue;
            bool unit = true;
            for (const auto& t : r.terms)
                if (std::abs(t.coef - 1.0) > kEps || group_of_[t.var] >= 0) unit = false;
            if (!unit) continue;
            int g = static_cast<int>(groups_.size());
            groups_.emplace_back();
            for (const auto& t : r.terms) {
                groups_[g].push_back(t.var);
                group_of_[t.var] = g;
            }
        }
        group_one_.assign(groups_.size(), 0);
    }

    bool assign(int v, int val) {
        if (assign_[v] >= 0) return assign_[v] == val;
        assign_[v] = val;
        trail_.push_back(v);
        for (const auto& [ri, q] : adj_[v]) {
            Row& r = rows_[ri];
            if (q > 0) r.pos_un -= q;
            else r.neg_un -= q;
            r.fixed += q * val;
            if (!in_queue_[ri]) {
                in_queue_[ri] = true;
                queue_.push_back(ri);
            }
        }
        double oc = obj_coef_[v];
        if (oc > 0) obj_pos_un_ -= oc;
        else obj_neg_un_ -= oc;
        obj_fixed_ += oc * val;
        if (group_of_[v] >= 0 && val == 1) ++group_one_[group_of_[v]];
        return true;
    }

    void undo_to(size_t mark) {
        while (trail_.size() > mark) {
            int v = trail_.back();
            trail_.pop_back();
            int val = assign_[v];
            assign_[v] = -1;
            for (const auto& [ri, q] : adj_[v]) {
                Row& r = rows_[ri];
                if (q > 0) r.pos_un += q;
                else r.neg_un += q;
                r.fixed -= q * val;
            }
            double oc = obj_coef_[v];
            if (oc > 0) obj_pos_un_ += oc;
            else obj_neg_un_ += oc;
            obj_fixed_ -= oc * val;
            if (group_of_[v] >= 0 && val == 1) --group_one_[group_of_[v]];
        }
        clear_queue();
    }

    void clear_queue() {
        for (int ri : queue_) in_queue_[ri] = false;
        queue_.clear();
    }

    // Processes dirty rows to fixpoint. Returns false on conflict.
    bool propagate() {
        while (!queue_.empty()) {
            int ri = queue_.back();
            queue_.pop_back();
            in_queue_[ri] = false;
            Row& r = rows_[ri];
            double lo = r.fixed + r.neg_un;
            double hi = r.fixed + r.pos_un;
            if (lo > r.rhs + kEps) { clear_queue(); return false; }
            if (r.eq && hi < r.rhs - kEps) { clear_queue(); return false; }
            for (const auto& t : r.terms) {
                if (assign_[t.var] >= 0) continue;
                double q = t.coef;
                // min/max of the row with this variable pinned to val
                auto feasible = [&](int val) {
                    double mn = lo - std::min(q, 0.0) + q * val;
                    if (mn > r.rhs + kEps) return false;
                    if (r.eq) {
                        double mx = hi - std::max(q, 0.0) + q * val;
                        if (mx < r.rhs - kEps) return false;
                    }
                    return true;
                };
                bool ok0 = feasible(0), ok1 = feasible(1);
                if (!ok0 && !ok1) { clear_queue(); return false; }
                if (ok0 != ok1) {
                    assign(t.var, ok1 ? 1 : 0);
                    lo = r.fixed + r.neg_un;
                    hi = r.fixed + r.pos_un;
                }
            }
        }
        return true;
    }

    double bound() const {
        // Optimistic completion of the objective over unassigned variables.
        // Per group, either a member is already 1 (the rest must be 0) or
        // exactly one unassigned member will be 1; both cases are tighter
        // than treating members independently.
        double b = obj_fixed_;
        bool maxi = m_.maximize();
        b += maxi ? obj_pos_un_ : obj_neg_un_;
        for (size_t g = 0; g < groups_.size(); ++g) {
            double base = 0;  // what the unassigned members added to b
            double best = maxi ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();
            bool any = false;
            for (int v : groups_[g]) {
                if (assign_[v] >= 0) continue;
                any = true;
                double oc = obj_coef_[v];
                if (maxi ? oc > 0 : oc < 0) base += oc;
                best = maxi ? std::max(best, oc) : std::min(best, oc);
            }
            if (!any) continue;
            double contrib = (group_one_[g] > 0) ? 0.0 : best;
            b += contrib - base;
        }
        return b;
    }

    bool better_than_incumbent(double b) const {
        if (!has_incumbent_) return true;
        return m_.maximize() ? b > best_obj_ + kEps : b < best_obj_ - kEps;
    }

    void dfs() {
        if (!deadline_ok_) return;
        if ((++nodes_ & 1023) == 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_) >= limit_)
            deadline_ok_ = false;
        if (!better_than_incumbent(bound())) return;
        int v = -1;
        for (int i = next_var_hint_; i < static_cast<int>(assign_.size()); ++i)
            if (assign_[i] < 0) { v = i; break; }
        if (v < 0) {
            double obj = obj_fixed_;
            if (better_than_incumbent(obj)) {
                has_incumbent_ = true;
                best_obj_ = obj;
                best_.assign(assign_.begin(), assign_.end());
            }
            return;
        }
        int saved_hint = next_var_hint_;
        next_var_hint_ = v;
        for (int val = 0; val <= 1 && deadline_ok_; ++val) {
            size_t mark = trail_.size();
            if (assign(v, val) && propagate()) dfs();
            undo_to(mark);
        }
        next_var_hint_ = saved_hint;
    }

    const Model& m_;
    std::vector<Row> rows_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<int8_t> assign_;
    std::vector<int> trail_;
    std::vector<int> queue_;
    std::vector<bool> in_queue_;
    std::vector<double> obj_coef_;
    double obj_fixed_ = 0, obj_pos_un_ = 0, obj_neg_un_ = 0;
    std::vector<std::vector<int>> groups_;
    std::vector<int> group_of_;
    std::vector<int> group_one_;
    int next_var_hint_ = 0;
    bool has_incumbent_ = false;
    double best_obj_ = 0;
    std::vector<uint8_t> best_;
    uint64_t nodes_ = 0;
    bool deadline_ok_ = true;
    std::chrono::duration<double> limit_{};
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

Outcome solve(const Model& m, std::chrono::duration<double> time_limit) {
    Solver s(m);
    return s.run(time_limit);
}

namespace {

std::string fmt_coef(double c) {
    char buf[64];
    if (c == static_cast<long long>(c))
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(c));
    else
        std::snprintf(buf, sizeof buf, "%.12g", c);
    return buf;
}

void append_terms(std::string& out, const std::vector<Term>& terms,
                  const std::vector<std::string>& names) {
    bool first = true;
    for (const auto& t : terms) {
        double c = t.coef;
        if (first) {
            out += (c < 0 ? "- " : "");
            first = false;
        } else {
            out += (c < 0 ? " - " : " + ");
        }
        out += fmt_coef(std::abs(c)) + " " + names[t.var];
    }
    if (first) out += "0";
}

}  // namespace

std::string export_lp(const Model& m) {
    const auto& names = m.var_names();
    std::string out;
    out += m.maximize() ? "Maximize\n" : "Minimize\n";
    out += " obj: ";
    if (m.objective().empty() && m.num_vars() > 0)
        out += "0 " + names[0];
    else
        append_terms(out, m.objective(), names);
    out += "\nSubject To\n";
    int i = 0;
    for (const auto& c : m.constraints()) {
        out += " c" + std::to_string(++i) + ": ";
        append_terms(out, c.terms, names);
        switch (c.cmp) {
            case Cmp::LE: out += " <= "; break;
            case Cmp::EQ: out += " = "; break;
            case Cmp::GE: out += " >= "; break;
        }
        out += fmt_coef(c.rhs) + "\n";
    }
    out += "Binary\n";
    for (const auto& n : names) out += " " + n + "\n";
    out += "End\n";
    return out;
}

}  // namespace pt::ilp
