#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace pt::ilp {

enum class Cmp { LE, EQ, GE };

struct Term {
    int var;
    double coef;
};

struct Constraint {
    std::vector<Term> terms;
    Cmp cmp = Cmp::LE;
    double rhs = 0.0;
};

// Pure binary linear program. Variable order is the branching order of
// the solver, so callers declare variables in the order they want the
// deterministic tie-break to follow.
class Model {
  public:
    int add_var(const std::string& name);
    void add_constraint(std::vector<Term> terms, Cmp cmp, double rhs);
    void set_objective(bool maximize, std::vector<Term> terms);

    // Fixes a variable via an equality row.
    void fix(int var, int value);

    int num_vars() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& var_names() const { return names_; }
    const std::vector<Constraint>& constraints() const { return rows_; }
    const std::vector<Term>& objective() const { return obj_; }
    bool maximize() const { return maximize_; }

  private:
    void check_terms(const std::vector<Term>& terms) const;

    std::vector<std::string> names_;
    std::vector<Constraint> rows_;
    std::vector<Term> obj_;
    bool maximize_ = false;
};

enum class Status { Optimal, FeasibleIncumbent, Infeasible, TimeoutNoIncumbent };

struct Outcome {
    Status status = Status::Infeasible;
    std::vector<uint8_t> assignment;  // valid unless Infeasible/TimeoutNoIncumbent
    double objective = 0.0;
    uint64_t nodes = 0;
    double wall_seconds = 0.0;
};

// Deterministic depth-first branch and bound: branches in declared
// variable order, value 0 first; prunes via constraint propagation and
// an optimistic objective completion. Returns the incumbent on timeout.
Outcome solve(const Model& m,
              std::chrono::duration<double> time_limit = std::chrono::duration<double>::max());

// CPLEX-LP dialect text; variable names are stable across runs.
std::string export_lp(const Model& m);

}  // namespace pt::ilp
