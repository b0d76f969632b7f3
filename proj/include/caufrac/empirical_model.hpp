#pragma once

#include <cstddef>
#include <vector>

#include "caufrac/numeric.hpp"
#include "caufrac/scenario.hpp"
#include "json.hpp"

namespace caufrac {

/// Distribution over the joint outputs of an event set, indexed by the
/// scenario's output indexer for that set.
template <Scalar T>
struct Distribution {
  Lowerset events;
  std::vector<T> probs;
};

/// A probability distribution over joint outputs for every joint input.
/// Rows are indexed by `scenario.input_indexer()`, columns by
/// `scenario.output_indexer()`. `meta` is carried through untouched.
template <Scalar T>
class BasicEmpiricalModel {
 public:
  using value_type = T;

  /// Throws ShapeError, NegativeEntryError or NormalizationError. In float
  /// mode rows must sum to 1 within `tolerance`; in rational mode exactly.
  static BasicEmpiricalModel from_table(CausalScenario scenario, std::vector<std::vector<T>> rows,
                                        double tolerance = kDefaultTolerance,
                                        nlohmann::json meta = nullptr);

  const CausalScenario& scenario() const { return scenario_; }
  const std::vector<std::vector<T>>& rows() const { return rows_; }
  const std::vector<T>& row(std::size_t input) const { return rows_.at(input); }
  const T& at(std::size_t input, std::size_t output) const { return rows_.at(input).at(output); }
  std::size_t num_inputs() const { return rows_.size(); }
  std::size_t num_outputs() const { return rows_.empty() ? 0 : rows_.front().size(); }
  const nlohmann::json& meta() const { return meta_; }

  /// Same table, evaluated against a different causal order.
  BasicEmpiricalModel with_scenario(CausalScenario scenario) const;
  BasicEmpiricalModel with_meta(nlohmann::json meta) const;

 private:
  CausalScenario scenario_;
  std::vector<std::vector<T>> rows_;
  nlohmann::json meta_;
};

using RationalModel = BasicEmpiricalModel<Rational>;
using FloatModel = BasicEmpiricalModel<double>;

FloatModel to_float(const RationalModel& model);
/// Exact binary expansion of every entry; rows generally no longer sum to 1
/// exactly, so this throws NormalizationError unless they do.
RationalModel to_rational(const FloatModel& model);

/// Sums out the events outside `events`; no lowerset check.
template <Scalar T>
Distribution<T> marginalize_events(const BasicEmpiricalModel<T>& model, std::size_t input_index,
                                   Lowerset events);

/// Marginal of the row for `input` onto a lowerset of the model's scenario.
/// Throws NotLowersetError.
template <Scalar T>
Distribution<T> marginalize(const BasicEmpiricalModel<T>& model, const Assignment& input,
                            Lowerset target);

template <Scalar T>
struct MarginalContext {
  /// Full joint input whose row produced `marginal`.
  Assignment input;
  Distribution<T> marginal;
};

template <Scalar T>
struct MarginalGroup {
  /// Inputs of the lowerset's events shared by every context in the group.
  Assignment lowerset_input;
  std::vector<MarginalContext<T>> contexts;
  bool agree = true;
};

template <Scalar T>
struct MarginalReport {
  Lowerset lowerset;
  std::vector<MarginalGroup<T>> groups;
  bool compatible = true;
  /// Largest |difference| between two marginals in the same group.
  T max_discrepancy{};
};

/// Groups full inputs by their restriction to `target` and compares the
/// marginals inside each group. Throws NotLowersetError.
template <Scalar T>
MarginalReport<T> check_compatibility(const BasicEmpiricalModel<T>& model, Lowerset target,
                                      double tolerance = kDefaultTolerance);

/// check_compatibility over every lowerset of the model's scenario.
template <Scalar T>
bool is_compatible_family(const BasicEmpiricalModel<T>& model,
                          double tolerance = kDefaultTolerance);

}  // namespace caufrac
