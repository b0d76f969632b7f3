#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "caufrac/numeric.hpp"

namespace caufrac::lp {

enum class Relation { less_equal, equal, greater_equal };

template <Scalar T>
struct Constraint {
  std::vector<T> coefficients;
  Relation relation;
  T rhs;
};

/// maximize objective·x subject to constraints, x ≥ 0.
template <Scalar T>
struct LinearProgram {
  std::vector<std::string> variables;
  std::vector<T> objective;
  std::vector<Constraint<T>> constraints;

  std::size_t add_variable(std::string name, T objective_coefficient = T{0});
  /// Sparse helper: (variable index, coefficient) terms.
  void add_constraint(const std::vector<std::pair<std::size_t, T>>& terms, Relation relation,
                      T rhs);
};

enum class Status { optimal, unbounded, infeasible };

std::string status_name(Status status);

template <Scalar T>
struct Solution {
  Status status = Status::infeasible;
  T objective_value{};
  std::vector<T> assignment;
};

struct SolveOptions {
  /// Float mode only: entries below this magnitude are treated as zero.
  double pivot_tolerance = 1e-12;
  /// Float mode only: tolerance used by the post-solve verification.
  double verify_tolerance = 1e-7;
  std::size_t max_iterations = 1'000'000;
  /// When set, the tableau is dumped after every pivot.
  std::ostream* trace = nullptr;
};

/// Two-phase dense simplex. Rational mode pivots with Bland's rule; float
/// mode uses the largest reduced cost and falls back to Bland after a run of
/// degenerate pivots. Float results are re-verified and a failed check raises
/// NumericalInstabilityError.
template <Scalar T>
Solution<T> solve(const LinearProgram<T>& program, const SolveOptions& options = {});

/// Re-evaluates bounds, constraints and the objective from scratch.
template <Scalar T>
bool verify(const LinearProgram<T>& program, const Solution<T>& solution,
            double tolerance = 1e-9);

}  // namespace caufrac::lp
