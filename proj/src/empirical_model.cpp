#include "caufrac/empirical_model.hpp"

#include "caufrac/errors.hpp"

namespace caufrac {

namespace {

// "row 'u1,u2'" for joint input i.
std::string row_name(const CausalScenario& scenario, std::size_t i) {
  const Assignment a = scenario.input_indexer().decode(i);
  std::string key;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k) key += ',';
    key += scenario.event(k).inputs[a[k]];
  }
  return "row '" + key + "'";
}

}  // namespace

template <Scalar T>
BasicEmpiricalModel<T> BasicEmpiricalModel<T>::from_table(CausalScenario scenario,
                                                          std::vector<std::vector<T>> rows,
                                                          double tolerance,
                                                          nlohmann::json meta) {
  using Traits = NumTraits<T>;
  const std::size_t n_in = scenario.input_indexer().size();
  const std::size_t n_out = scenario.output_indexer().size();
  if (rows.size() != n_in) {
    throw ShapeError("table has " + std::to_string(rows.size()) + " rows, scenario has " +
                     std::to_string(n_in) + " joint inputs");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n_out) {
      throw ShapeError(row_name(scenario, i) + " has " + std::to_string(rows[i].size()) +
                       " entries, scenario has " + std::to_string(n_out) + " joint outputs");
    }
    T sum{0};
    for (const T& p : rows[i]) {
      if (p < 0) throw NegativeEntryError(row_name(scenario, i) + " has a negative entry");
      sum += p;
    }
    if (!Traits::eq(sum, T{1}, tolerance)) {
      throw NormalizationError(row_name(scenario, i) + " sums to " +
                               std::to_string(Traits::to_double(sum)) + ", not 1");
    }
  }
  BasicEmpiricalModel model;
  model.scenario_ = std::move(scenario);
  model.rows_ = std::move(rows);
  model.meta_ = std::move(meta);
  return model;
}

template <Scalar T>
BasicEmpiricalModel<T> BasicEmpiricalModel<T>::with_scenario(CausalScenario scenario) const {
  if (!scenario.same_shape(scenario_)) {
    throw ShapeError("replacement scenario has different events or alphabets");
  }
  BasicEmpiricalModel copy = *this;
  copy.scenario_ = std::move(scenario);
  return copy;
}

template <Scalar T>
BasicEmpiricalModel<T> BasicEmpiricalModel<T>::with_meta(nlohmann::json meta) const {
  BasicEmpiricalModel copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

FloatModel to_float(const RationalModel& model) {
  std::vector<std::vector<double>> rows;
  rows.reserve(model.num_inputs());
  for (const auto& r : model.rows()) {
    auto& out = rows.emplace_back();
    out.reserve(r.size());
    for (const auto& p : r) out.push_back(rational_to_double(p));
  }
  return FloatModel::from_table(model.scenario(), std::move(rows), kDefaultTolerance, model.meta());
}

RationalModel to_rational(const FloatModel& model) {
  std::vector<std::vector<Rational>> rows;
  for (const auto& r : model.rows()) {
    auto& out = rows.emplace_back();
    for (double p : r) out.emplace_back(p);
  }
  return RationalModel::from_table(model.scenario(), std::move(rows), 0.0, model.meta());
}

template <Scalar T>
Distribution<T> marginalize_events(const BasicEmpiricalModel<T>& model, std::size_t input_index,
                                   Lowerset events) {
  const auto& scenario = model.scenario();
  const JointIndexer full_out = scenario.output_indexer();
  const JointIndexer target_out = scenario.output_indexer(events.mask());
  const auto members = events.members();

  Distribution<T> dist{events, std::vector<T>(target_out.size(), T{0})};
  const auto& row = model.row(input_index);
  Assignment projected(members.size());
  for (std::size_t o = 0; o < full_out.size(); ++o) {
    const Assignment outs = full_out.decode(o);
    for (std::size_t p = 0; p < members.size(); ++p) projected[p] = outs[members[p]];
    dist.probs[target_out.encode(projected)] += row[o];
  }
  return dist;
}

template <Scalar T>
Distribution<T> marginalize(const BasicEmpiricalModel<T>& model, const Assignment& input,
                            Lowerset target) {
  const auto& scenario = model.scenario();
  if (!scenario.is_lowerset(target.mask())) {
    throw NotLowersetError("marginalization target is not a lowerset of the scenario");
  }
  const JointIndexer in = scenario.input_indexer();
  if (input.size() != in.arity()) throw ShapeError("input must assign every event");
  for (std::size_t k = 0; k < input.size(); ++k) {
    if (input[k] >= in.radices()[k]) throw ShapeError("input position out of range");
  }
  return marginalize_events(model, in.encode(input), target);
}

template <Scalar T>
MarginalReport<T> check_compatibility(const BasicEmpiricalModel<T>& model, Lowerset target,
                                      double tolerance) {
  using Traits = NumTraits<T>;
  const auto& scenario = model.scenario();
  if (!scenario.is_lowerset(target.mask())) {
    throw NotLowersetError("compatibility target is not a lowerset of the scenario");
  }
  const JointIndexer in = scenario.input_indexer();
  const JointIndexer target_in = scenario.input_indexer(target.mask());
  const auto members = target.members();

  MarginalReport<T> report;
  report.lowerset = target;
  report.groups.resize(target_in.size());
  for (std::size_t g = 0; g < target_in.size(); ++g) {
    report.groups[g].lowerset_input = target_in.decode(g);
  }
  Assignment key(members.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    Assignment input = in.decode(i);
    for (std::size_t p = 0; p < members.size(); ++p) key[p] = input[members[p]];
    report.groups[target_in.encode(key)].contexts.push_back(
        {std::move(input), marginalize_events(model, i, target)});
  }

  for (auto& group : report.groups) {
    for (std::size_t a = 0; a < group.contexts.size(); ++a) {
      for (std::size_t b = a + 1; b < group.contexts.size(); ++b) {
        const auto& pa = group.contexts[a].marginal.probs;
        const auto& pb = group.contexts[b].marginal.probs;
        for (std::size_t o = 0; o < pa.size(); ++o) {
          T diff = Traits::abs(T(pa[o] - pb[o]));
          if (diff > report.max_discrepancy) report.max_discrepancy = diff;
          if (!Traits::is_zero(diff, tolerance)) group.agree = false;
        }
      }
    }
    if (!group.agree) report.compatible = false;
  }
  return report;
}

template <Scalar T>
bool is_compatible_family(const BasicEmpiricalModel<T>& model, double tolerance) {
  for (const Lowerset& ls : lowersets(model.scenario())) {
    if (!check_compatibility(model, ls, tolerance).compatible) return false;
  }
  return true;
}

#define CAUFRAC_INSTANTIATE(T)                                                                \
  template class BasicEmpiricalModel<T>;                                                      \
  template Distribution<T> marginalize_events(const BasicEmpiricalModel<T>&, std::size_t,     \
                                              Lowerset);                                      \
  template Distribution<T> marginalize(const BasicEmpiricalModel<T>&, const Assignment&,      \
                                       Lowerset);                                             \
  template MarginalReport<T> check_compatibility(const BasicEmpiricalModel<T>&, Lowerset,     \
                                                 double);                                     \
  template bool is_compatible_family(const BasicEmpiricalModel<T>&, double);

CAUFRAC_INSTANTIATE(Rational)
CAUFRAC_INSTANTIATE(double)

#undef CAUFRAC_INSTANTIATE

}  // namespace caufrac
