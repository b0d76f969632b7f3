#include "caufrac/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "caufrac/errors.hpp"

namespace caufrac::lp {

std::string status_name(Status status) {
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::unbounded:
      return "unbounded";
    case Status::infeasible:
      return "infeasible";
  }
  return "unknown";
}

template <Scalar T>
std::size_t LinearProgram<T>::add_variable(std::string name, T objective_coefficient) {
  variables.push_back(std::move(name));
  objective.push_back(std::move(objective_coefficient));
  for (auto& c : constraints) c.coefficients.emplace_back(0);
  return variables.size() - 1;
}

template <Scalar T>
void LinearProgram<T>::add_constraint(const std::vector<std::pair<std::size_t, T>>& terms,
                                      Relation relation, T rhs) {
  Constraint<T> c{std::vector<T>(variables.size(), T{0}), relation, std::move(rhs)};
  for (const auto& [index, coefficient] : terms) c.coefficients.at(index) += coefficient;
  constraints.push_back(std::move(c));
}

namespace {

template <Scalar T>
class Tableau {
 public:
  Tableau(const LinearProgram<T>& program, const SolveOptions& options)
      : options_(options), n_vars_(program.variables.size()) {
    for (const auto& c : program.constraints) {
      if (c.coefficients.size() != n_vars_) {
        throw ShapeError("constraint length does not match the number of variables");
      }
    }
    if (program.objective.size() != n_vars_) {
      throw ShapeError("objective length does not match the number of variables");
    }

    const std::size_t m = program.constraints.size();
    std::vector<Relation> relation(m);
    std::vector<bool> flip(m, false);
    std::size_t n_slack = 0;
    std::size_t n_art = 0;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& c = program.constraints[r];
      relation[r] = c.relation;
      if (c.rhs < 0) {
        flip[r] = true;
        if (relation[r] == Relation::less_equal) {
          relation[r] = Relation::greater_equal;
        } else if (relation[r] == Relation::greater_equal) {
          relation[r] = Relation::less_equal;
        }
      }
      if (relation[r] != Relation::equal) ++n_slack;
      if (relation[r] != Relation::less_equal) ++n_art;
    }
    first_art_ = n_vars_ + n_slack;
    n_cols_ = first_art_ + n_art;
    rows_.assign(m, std::vector<T>(n_cols_ + 1, T{0}));
    basis_.assign(m, 0);

    std::size_t next_slack = n_vars_;
    std::size_t next_art = first_art_;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& c = program.constraints[r];
      auto& row = rows_[r];
      for (std::size_t j = 0; j < n_vars_; ++j) {
        row[j] = flip[r] ? T(-c.coefficients[j]) : c.coefficients[j];
      }
      row[n_cols_] = flip[r] ? T(-c.rhs) : c.rhs;
      switch (relation[r]) {
        case Relation::less_equal:
          row[next_slack] = 1;
          basis_[r] = next_slack++;
          break;
        case Relation::greater_equal:
          row[next_slack++] = -1;
          row[next_art] = 1;
          basis_[r] = next_art++;
          break;
        case Relation::equal:
          row[next_art] = 1;
          basis_[r] = next_art++;
          break;
      }
    }
  }

  Solution<T> run(const LinearProgram<T>& program) {
    using Traits = NumTraits<T>;
    Solution<T> sol;
    if (first_art_ < n_cols_) {
      // Phase 1: maximize -sum(artificials).
      std::vector<T> cost(n_cols_ + 1, T{0});
      for (std::size_t j = first_art_; j < n_cols_; ++j) cost[j] = -1;
      load_cost(cost);
      trace("phase 1 start");
      if (iterate(n_cols_) != Status::optimal) {
        throw InfeasibleError("phase 1 reported an unbounded auxiliary problem");
      }
      T phase1 = -cost_[n_cols_];
      if (phase1 < 0 && !Traits::is_zero(phase1, feasibility_tolerance())) {
        sol.status = Status::infeasible;
        return sol;
      }
      drive_out_artificials();
    }
    std::vector<T> cost(n_cols_ + 1, T{0});
    for (std::size_t j = 0; j < n_vars_; ++j) cost[j] = program.objective[j];
    load_cost(cost);
    trace("phase 2 start");
    Status status = iterate(first_art_);
    sol.status = status;
    if (status != Status::optimal) return sol;

    sol.assignment.assign(n_vars_, T{0});
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (basis_[r] < n_vars_) sol.assignment[basis_[r]] = rows_[r][n_cols_];
    }
    if constexpr (!Traits::exact) {
      for (auto& x : sol.assignment) {
        if (std::fabs(x) <= options_.pivot_tolerance) x = 0;
      }
    }
    T value{0};
    for (std::size_t j = 0; j < n_vars_; ++j) value += program.objective[j] * sol.assignment[j];
    sol.objective_value = value;
    return sol;
  }

 private:
  double tolerance() const { return NumTraits<T>::exact ? 0.0 : options_.pivot_tolerance; }
  double feasibility_tolerance() const {
    return NumTraits<T>::exact ? 0.0 : options_.verify_tolerance;
  }

  void load_cost(const std::vector<T>& cost) {
    cost_ = cost;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const T& cb = cost[basis_[r]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= n_cols_; ++j) cost_[j] -= cb * rows_[r][j];
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    using Traits = NumTraits<T>;
    auto& prow = rows_[r];
    const T piv = prow[c];
    for (auto& v : prow) v /= piv;
    prow[c] = 1;
    auto eliminate = [&](std::vector<T>& row) {
      if (row[c] == 0) return;
      const T factor = row[c];
      for (std::size_t j = 0; j <= n_cols_; ++j) {
        if (prow[j] != 0) row[j] -= factor * prow[j];
        if constexpr (!Traits::exact) {
          if (std::fabs(row[j]) <= options_.pivot_tolerance * 1e-3) row[j] = 0;
        }
      }
      row[c] = 0;
    };
    for (std::size_t rr = 0; rr < rows_.size(); ++rr) {
      if (rr != r) eliminate(rows_[rr]);
    }
    eliminate(cost_);
    basis_[r] = c;
  }

  // Columns >= limit never enter.
  Status iterate(std::size_t limit) {
    using Traits = NumTraits<T>;
    const double tol = tolerance();
    std::size_t degenerate_run = 0;
    for (std::size_t it = 0; it < options_.max_iterations; ++it) {
      const bool bland = Traits::exact || degenerate_run > 50;
      std::size_t entering = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        if (!Traits::positive(cost_[j], tol)) continue;
        if (bland) {
          entering = j;
          break;
        }
        if (entering == limit || cost_[j] > cost_[entering]) entering = j;
      }
      if (entering == limit) return Status::optimal;

      std::size_t leaving = rows_.size();
      T best_ratio{0};
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const T& a = rows_[r][entering];
        if (!Traits::positive(a, tol)) continue;
        T ratio = rows_[r][n_cols_] / a;
        bool take = leaving == rows_.size();
        if (!take) {
          if (Traits::eq(ratio, best_ratio, tol)) {
            take = basis_[r] < basis_[leaving];
          } else {
            take = ratio < best_ratio;
          }
        }
        if (take) {
          leaving = r;
          best_ratio = ratio;
        }
      }
      if (leaving == rows_.size()) return Status::unbounded;
      if (Traits::is_zero(best_ratio, tol)) {
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      pivot(leaving, entering);
      if (options_.trace) {
        *options_.trace << "pivot " << it << ": enter " << entering << ", leave row " << leaving
                        << "\n";
        trace(nullptr);
      }
    }
    if constexpr (Traits::exact) {
      throw InfeasibleError("simplex iteration limit reached");
    } else {
      throw NumericalInstabilityError("simplex iteration limit reached; rerun in rational mode");
    }
  }

  void drive_out_artificials() {
    using Traits = NumTraits<T>;
    for (std::size_t r = 0; r < rows_.size();) {
      if (basis_[r] < first_art_) {
        ++r;
        continue;
      }
      std::size_t col = first_art_;
      for (std::size_t j = 0; j < first_art_; ++j) {
        if (!Traits::is_zero(rows_[r][j], tolerance())) {
          col = j;
          break;
        }
      }
      if (col < first_art_) {
        pivot(r, col);
        ++r;
      } else {
        // Redundant equality: every structural coefficient is zero.
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
      }
    }
  }

  void trace(const char* label) const {
    if (!options_.trace) return;
    auto& os = *options_.trace;
    if (label) os << label << "\n";
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      os << "  x" << basis_[r] << " |";
      for (const auto& v : rows_[r]) os << ' ' << v;
      os << "\n";
    }
    os << "  z  |";
    for (const auto& v : cost_) os << ' ' << v;
    os << "\n";
  }

  const SolveOptions& options_;
  std::size_t n_vars_;
  std::size_t first_art_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::vector<T>> rows_;
  std::vector<T> cost_;
  std::vector<std::size_t> basis_;
};

}  // namespace

template <Scalar T>
Solution<T> solve(const LinearProgram<T>& program, const SolveOptions& options) {
  Tableau<T> tableau(program, options);
  Solution<T> sol = tableau.run(program);
  if constexpr (!NumTraits<T>::exact) {
    if (sol.status == Status::optimal && !verify(program, sol, options.verify_tolerance)) {
      throw NumericalInstabilityError(
          "float simplex result fails verification; rerun in rational mode");
    }
  }
  return sol;
}

template <Scalar T>
bool verify(const LinearProgram<T>& program, const Solution<T>& solution, double tolerance) {
  using Traits = NumTraits<T>;
  if (solution.status != Status::optimal) return false;
  const auto& x = solution.assignment;
  if (x.size() != program.variables.size()) return false;
  for (const auto& v : x) {
    if (!Traits::leq(T{0}, v, tolerance)) return false;
  }
  for (const auto& c : program.constraints) {
    if (c.coefficients.size() != x.size()) return false;
    T lhs{0};
    for (std::size_t j = 0; j < x.size(); ++j) lhs += c.coefficients[j] * x[j];
    const double scale = std::max(1.0, Traits::to_double(Traits::abs(c.rhs)));
    const double tol = tolerance * scale;
    switch (c.relation) {
      case Relation::less_equal:
        if (!Traits::leq(lhs, c.rhs, tol)) return false;
        break;
      case Relation::greater_equal:
        if (!Traits::leq(c.rhs, lhs, tol)) return false;
        break;
      case Relation::equal:
        if (!Traits::eq(lhs, c.rhs, tol)) return false;
        break;
    }
  }
  T value{0};
  for (std::size_t j = 0; j < x.size(); ++j) value += program.objective[j] * x[j];
  return Traits::eq(value, solution.objective_value, tolerance);
}

template struct LinearProgram<Rational>;
template struct LinearProgram<double>;
template Solution<Rational> solve(const LinearProgram<Rational>&, const SolveOptions&);
template Solution<double> solve(const LinearProgram<double>&, const SolveOptions&);
template bool verify(const LinearProgram<Rational>&, const Solution<Rational>&, double);
template bool verify(const LinearProgram<double>&, const Solution<double>&, double);

}  // namespace caufrac::lp
