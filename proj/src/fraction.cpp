#include "caufrac/fraction.hpp"

#include <algorithm>

#include "caufrac/errors.hpp"

namespace caufrac {

CausalOrderSpec CausalOrderSpec::chain(std::string first, std::string second) {
  CausalOrderSpec spec;
  spec.kind_ = Kind::chain;
  spec.relation_ = {{first, second}};
  spec.first_ = std::move(first);
  spec.second_ = std::move(second);
  return spec;
}

CausalOrderSpec CausalOrderSpec::no_signalling() { return CausalOrderSpec{}; }

CausalOrderSpec CausalOrderSpec::general(OrderRelation relation) {
  CausalOrderSpec spec;
  spec.kind_ = Kind::general;
  spec.relation_ = std::move(relation);
  return spec;
}

std::string CausalOrderSpec::label() const {
  switch (kind_) {
    case Kind::chain:
      return first_ + "->" + second_;
    case Kind::no_signalling:
      return "NS";
    case Kind::general: {
      std::string out = "poset[";
      for (std::size_t k = 0; k < relation_.size(); ++k) {
        if (k) out += ',';
        out += relation_[k].first + "->" + relation_[k].second;
      }
      return out + "]";
    }
  }
  return "?";
}

CausalScenario CausalOrderSpec::apply_to(const CausalScenario& scenario) const {
  return scenario.with_order(relation_);
}

std::string method_name(FractionMethod method) {
  switch (method) {
    case FractionMethod::closed_form:
      return "closed_form";
    case FractionMethod::upper_bound:
      return "upper_bound";
    case FractionMethod::lp:
      return "lp";
    case FractionMethod::section_mixture:
      return "section_mixture";
  }
  return "?";
}

MethodChoice parse_method_choice(const std::string& text) {
  if (text == "auto") return MethodChoice::automatic;
  if (text == "closed") return MethodChoice::closed;
  if (text == "lp") return MethodChoice::lp;
  if (text == "bound") return MethodChoice::bound;
  throw ParseError("unknown method '" + text + "' (expected auto|closed|lp|bound)");
}

std::string method_choice_name(MethodChoice choice) {
  switch (choice) {
    case MethodChoice::automatic:
      return "auto";
    case MethodChoice::closed:
      return "closed";
    case MethodChoice::lp:
      return "lp";
    case MethodChoice::bound:
      return "bound";
  }
  return "?";
}

bool is_bell222(const CausalScenario& scenario) {
  if (scenario.num_events() != 2) return false;
  for (const auto& ev : scenario.events()) {
    if (ev.inputs.size() != 2 || ev.outputs.size() != 2) return false;
  }
  return true;
}

namespace {

Lowerset single(std::size_t event) {
  return Lowerset(EventMask{1} << event);
}

// marginals[l][i]: marginal of row i on lowerset l.
template <Scalar T>
std::vector<std::vector<Distribution<T>>> marginal_table(const BasicEmpiricalModel<T>& model,
                                                         const std::vector<Lowerset>& sets) {
  std::vector<std::vector<Distribution<T>>> out(sets.size());
  for (std::size_t l = 0; l < sets.size(); ++l) {
    out[l].reserve(model.num_inputs());
    for (std::size_t i = 0; i < model.num_inputs(); ++i) {
      out[l].push_back(marginalize_events(model, i, sets[l]));
    }
  }
  return out;
}

}  // namespace

template <Scalar T>
T upper_bound_fraction(const BasicEmpiricalModel<T>& model, const CausalOrderSpec& order) {
  using Traits = NumTraits<T>;
  const CausalScenario scenario = order.apply_to(model.scenario());
  std::vector<Lowerset> sets;
  for (const auto& ls : lowersets(scenario)) {
    if (!ls.empty()) sets.push_back(ls);
  }
  const auto marginals = marginal_table(model, sets);
  const JointIndexer in = scenario.input_indexer();

  T bound{1};
  for (std::size_t a = 0; a < in.size(); ++a) {
    const Assignment ia = in.decode(a);
    for (std::size_t b = a + 1; b < in.size(); ++b) {
      const Assignment ib = in.decode(b);
      EventMask common = 0;
      for (std::size_t k = 0; k < ia.size(); ++k) {
        if (ia[k] == ib[k]) common |= EventMask{1} << k;
      }
      const Lowerset meet = scenario.largest_lowerset_within(common);
      for (std::size_t l = 0; l < sets.size(); ++l) {
        if (!sets[l].is_subset_of(meet)) continue;
        const auto& pa = marginals[l][a].probs;
        const auto& pb = marginals[l][b].probs;
        for (std::size_t o = 0; o < pa.size(); ++o) {
          T term = T{1} - Traits::abs(T(pa[o] - pb[o]));
          if (term < bound) bound = term;
        }
      }
    }
  }
  return bound;
}

template <Scalar T>
FractionResult<T> bell222_fraction(const BasicEmpiricalModel<T>& model,
                                   const CausalOrderSpec& order, double tolerance) {
  const CausalScenario& base = model.scenario();
  if (!is_bell222(base)) throw ShapeError("closed form needs a (2,2,2) model");
  if (order.kind() != CausalOrderSpec::Kind::chain) {
    throw ShapeError("closed form applies to chain orders only");
  }
  const std::size_t x = base.index_of(order.first());
  const std::size_t y = base.index_of(order.second());
  if (x == y) throw ShapeError("chain order needs two distinct events");
  const JointIndexer in = base.input_indexer();
  const JointIndexer out = base.output_indexer();

  auto row_index = [&](std::size_t ix, std::size_t iy) {
    Assignment digits(2);
    digits[x] = ix;
    digits[y] = iy;
    return in.encode(digits);
  };
  // margin[ix][iy] = marginal on the first event.
  std::vector<std::vector<std::vector<T>>> margin(2, std::vector<std::vector<T>>(2));
  for (std::size_t ix = 0; ix < 2; ++ix) {
    for (std::size_t iy = 0; iy < 2; ++iy) {
      margin[ix][iy] = marginalize_events(model, row_index(ix, iy), single(x)).probs;
    }
  }

  FractionResult<T> result;
  result.order = order;
  result.method = FractionMethod::closed_form;
  result.gamma = T{1};
  for (std::size_t ix = 0; ix < 2; ++ix) {
    for (std::size_t o = 0; o < 2; ++o) {
      T term = T{1} - NumTraits<T>::abs(T(margin[ix][0][o] - margin[ix][1][o]));
      if (term < result.gamma) result.gamma = term;
    }
  }
  if (result.gamma <= 0) {
    result.gamma = T{0};
    return result;
  }

  // First-event marginal of the witness, per input of the first event.
  std::vector<std::vector<T>> w(2, std::vector<T>(2));
  for (std::size_t ix = 0; ix < 2; ++ix) {
    std::vector<T> low(2);
    for (std::size_t o = 0; o < 2; ++o) low[o] = std::min(margin[ix][0][o], margin[ix][1][o]);
    const std::size_t star = low[1] < low[0] ? 1 : 0;
    const T mass = std::min(low[star], result.gamma);
    w[ix][star] = mass / result.gamma;
    w[ix][1 - star] = T{1} - w[ix][star];
  }

  std::vector<std::vector<T>> rows(in.size(), std::vector<T>(out.size()));
  for (std::size_t ix = 0; ix < 2; ++ix) {
    for (std::size_t iy = 0; iy < 2; ++iy) {
      const std::size_t i = row_index(ix, iy);
      for (std::size_t ox = 0; ox < 2; ++ox) {
        for (std::size_t oy = 0; oy < 2; ++oy) {
          Assignment digits(2);
          digits[x] = ox;
          digits[y] = oy;
          const std::size_t o = out.encode(digits);
          const T& m = margin[ix][iy][ox];
          T conditional = m == 0 ? T(T{1} / T{2}) : T(model.at(i, o) / m);
          rows[i][o] = conditional * w[ix][ox];
        }
      }
    }
  }
  result.witness =
      BasicEmpiricalModel<T>::from_table(order.apply_to(base), std::move(rows), tolerance);
  return result;
}

namespace {

// Maximize the mass of c subject to c ⪯ e and, for every scenario in
// `orders`, equal marginals on each proper lowerset across inputs that agree
// on it. The empty lowerset supplies the equal-mass rows.
template <Scalar T>
lp::LinearProgram<T> marginal_program(const BasicEmpiricalModel<T>& model,
                                      const std::vector<CausalScenario>& orders) {
  const CausalScenario& base = model.scenario();
  const std::size_t n_in = model.num_inputs();
  const std::size_t n_out = model.num_outputs();
  const JointIndexer in = base.input_indexer();
  const JointIndexer out = base.output_indexer();

  lp::LinearProgram<T> program;
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t o = 0; o < n_out; ++o) {
      program.add_variable("c" + std::to_string(i) + "_" + std::to_string(o),
                           i == 0 ? T{1} : T{0});
    }
  }
  auto var = [&](std::size_t i, std::size_t o) { return i * n_out + o; };
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t o = 0; o < n_out; ++o) {
      program.add_constraint({{var(i, o), T{1}}}, lp::Relation::less_equal, model.at(i, o));
    }
  }

  std::vector<EventMask> done;
  for (const auto& scenario : orders) {
    for (const Lowerset& ls : lowersets(scenario)) {
      if (ls == scenario.full()) continue;
      if (std::find(done.begin(), done.end(), ls.mask()) != done.end()) continue;
      done.push_back(ls.mask());
      const auto members = ls.members();
      const JointIndexer ls_in = base.input_indexer(ls.mask());
      const JointIndexer ls_out = base.output_indexer(ls.mask());
      // Projection of every joint output onto the lowerset.
      std::vector<std::size_t> proj(n_out);
      Assignment digits(members.size());
      for (std::size_t o = 0; o < n_out; ++o) {
        const Assignment outs = out.decode(o);
        for (std::size_t p = 0; p < members.size(); ++p) digits[p] = outs[members[p]];
        proj[o] = ls_out.encode(digits);
      }
      std::vector<std::size_t> representative(ls_in.size(), n_in);
      for (std::size_t i = 0; i < n_in; ++i) {
        const Assignment ins = in.decode(i);
        for (std::size_t p = 0; p < members.size(); ++p) digits[p] = ins[members[p]];
        const std::size_t key = ls_in.encode(digits);
        if (representative[key] == n_in) {
          representative[key] = i;
          continue;
        }
        const std::size_t rep = representative[key];
        for (std::size_t target = 0; target < ls_out.size(); ++target) {
          std::vector<std::pair<std::size_t, T>> terms;
          for (std::size_t o = 0; o < n_out; ++o) {
            if (proj[o] != target) continue;
            terms.emplace_back(var(i, o), T{1});
            terms.emplace_back(var(rep, o), T{-1});
          }
          program.add_constraint(terms, lp::Relation::equal, T{0});
        }
      }
    }
  }
  return program;
}

template <Scalar T>
std::vector<std::vector<T>> normalized_rows(std::vector<std::vector<T>> rows, const T& gamma) {
  for (auto& row : rows) {
    T mass{0};
    for (auto& v : row) {
      if constexpr (!NumTraits<T>::exact) {
        if (v < 0) v = 0;
      }
      mass += v;
    }
    const T& denom = NumTraits<T>::exact ? gamma : mass;
    for (auto& v : row) v /= denom;
  }
  return rows;
}

template <Scalar T>
FractionResult<T> solve_marginal_program(const BasicEmpiricalModel<T>& model,
                                         const CausalOrderSpec& order,
                                         const std::vector<CausalScenario>& constraint_orders,
                                         const FractionOptions& options) {
  const auto program = marginal_program(model, constraint_orders);
  const auto sol = lp::solve(program, options.solver);
  if (sol.status != lp::Status::optimal) {
    throw InfeasibleError("causal fraction program reported " + lp::status_name(sol.status));
  }
  FractionResult<T> result;
  result.order = order;
  result.method = FractionMethod::lp;
  result.gamma = sol.objective_value;
  if (!NumTraits<T>::positive(result.gamma, NumTraits<T>::exact ? 0.0 : options.tolerance)) {
    result.gamma = T{0};
    return result;
  }
  if constexpr (!NumTraits<T>::exact) {
    result.gamma = std::min(result.gamma, 1.0);
  }
  const std::size_t n_out = model.num_outputs();
  std::vector<std::vector<T>> rows(model.num_inputs(), std::vector<T>(n_out));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t o = 0; o < n_out; ++o) rows[i][o] = sol.assignment[i * n_out + o];
  }
  result.witness = BasicEmpiricalModel<T>::from_table(
      order.apply_to(model.scenario()), normalized_rows(std::move(rows), result.gamma),
      options.tolerance);
  return result;
}

}  // namespace

template <Scalar T>
FractionResult<T> lp_fraction(const BasicEmpiricalModel<T>& model, const CausalOrderSpec& order,
                              const FractionOptions& options) {
  return solve_marginal_program(model, order, {order.apply_to(model.scenario())}, options);
}

template <Scalar T>
FractionResult<T> section_mixture_fraction(const BasicEmpiricalModel<T>& model,
                                           const CausalOrderSpec& order,
                                           const FractionOptions& options) {
  const CausalScenario scenario = order.apply_to(model.scenario());
  const auto sections = enumerate_sections(scenario, full_element(scenario), options.section_cap);
  const std::size_t n_in = model.num_inputs();
  const std::size_t n_out = model.num_outputs();
  const JointIndexer out = scenario.output_indexer();

  // hit[s][i]: joint output index section s produces on joint input i.
  std::vector<std::vector<std::size_t>> hit(sections.size(), std::vector<std::size_t>(n_in));
  for (std::size_t s = 0; s < sections.size(); ++s) {
    for (std::size_t i = 0; i < n_in; ++i) hit[s][i] = out.encode(sections[s].outputs()[i]);
  }

  lp::LinearProgram<T> program;
  program.variables.resize(sections.size());
  program.objective.assign(sections.size(), T{1});
  for (std::size_t s = 0; s < sections.size(); ++s) program.variables[s] = "w" + std::to_string(s);
  program.constraints.reserve(n_in * n_out);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t o = 0; o < n_out; ++o) {
      lp::Constraint<T> c{std::vector<T>(sections.size(), T{0}), lp::Relation::less_equal,
                          model.at(i, o)};
      for (std::size_t s = 0; s < sections.size(); ++s) {
        if (hit[s][i] == o) c.coefficients[s] = 1;
      }
      program.constraints.push_back(std::move(c));
    }
  }
  const auto sol = lp::solve(program, options.solver);
  if (sol.status != lp::Status::optimal) {
    throw InfeasibleError("section mixture program reported " + lp::status_name(sol.status));
  }

  FractionResult<T> result;
  result.order = order;
  result.method = FractionMethod::section_mixture;
  result.gamma = sol.objective_value;
  if (!NumTraits<T>::positive(result.gamma, NumTraits<T>::exact ? 0.0 : options.tolerance)) {
    result.gamma = T{0};
    return result;
  }
  if constexpr (!NumTraits<T>::exact) {
    result.gamma = std::min(result.gamma, 1.0);
  }
  std::vector<std::vector<T>> rows(n_in, std::vector<T>(n_out, T{0}));
  for (std::size_t s = 0; s < sections.size(); ++s) {
    if (sol.assignment[s] == 0) continue;
    for (std::size_t i = 0; i < n_in; ++i) rows[i][hit[s][i]] += sol.assignment[s];
  }
  result.witness = BasicEmpiricalModel<T>::from_table(
      scenario, normalized_rows(std::move(rows), result.gamma), options.tolerance);
  return result;
}

template <Scalar T>
FractionResult<T> nosignalling_fraction(const BasicEmpiricalModel<T>& model,
                                        const FractionOptions& options) {
  const CausalOrderSpec ns = CausalOrderSpec::no_signalling();
  FractionResult<T> result = lp_fraction(model, ns, options);
  const CausalScenario& base = model.scenario();
  if (is_bell222(base)) {
    const std::string& a = base.event(0).id;
    const std::string& b = base.event(1).id;
    const auto both = solve_marginal_program(
        model, ns,
        {CausalOrderSpec::chain(a, b).apply_to(base), CausalOrderSpec::chain(b, a).apply_to(base)},
        options);
    if (!NumTraits<T>::eq(both.gamma, result.gamma, options.solver.verify_tolerance)) {
      throw SolverError("SolverError",
                        "no-signalling fraction disagrees with the two-chain program");
    }
  }
  return result;
}

template <Scalar T>
bool witness_check(const BasicEmpiricalModel<T>& model, const T& gamma,
                   const BasicEmpiricalModel<T>& witness, double tolerance) {
  using Traits = NumTraits<T>;
  if (!witness.scenario().same_shape(model.scenario())) {
    throw ShapeError("witness is defined on a different scenario shape");
  }
  if (gamma == 0) return true;
  if (gamma < 0 || gamma > 1) return false;
  for (std::size_t i = 0; i < model.num_inputs(); ++i) {
    for (std::size_t o = 0; o < model.num_outputs(); ++o) {
      if (!Traits::leq(T(gamma * witness.at(i, o)), model.at(i, o), tolerance)) return false;
    }
  }
  return is_compatible_family(witness, tolerance);
}

template <Scalar T>
FractionResult<T> compute_fraction(const BasicEmpiricalModel<T>& model,
                                   const CausalOrderSpec& order, MethodChoice choice,
                                   const FractionOptions& options) {
  const bool closed_applies =
      order.kind() == CausalOrderSpec::Kind::chain && is_bell222(model.scenario());
  const bool is_ns = order.kind() == CausalOrderSpec::Kind::no_signalling;
  switch (choice) {
    case MethodChoice::bound: {
      FractionResult<T> result;
      result.order = order;
      result.method = FractionMethod::upper_bound;
      result.gamma = upper_bound_fraction(model, order);
      return result;
    }
    case MethodChoice::closed:
      if (!closed_applies && !is_ns) return bell222_fraction(model, order, options.tolerance);
      [[fallthrough]];
    case MethodChoice::automatic:
      if (closed_applies) return bell222_fraction(model, order, options.tolerance);
      [[fallthrough]];
    case MethodChoice::lp:
      return is_ns ? nosignalling_fraction(model, options) : lp_fraction(model, order, options);
  }
  throw ParseError("unknown method choice");
}

std::vector<CausalOrderSpec> report_orders(const CausalScenario& scenario) {
  if (scenario.num_events() == 2) {
    const auto& a = scenario.event(0).id;
    const auto& b = scenario.event(1).id;
    return {CausalOrderSpec::chain(a, b), CausalOrderSpec::chain(b, a),
            CausalOrderSpec::no_signalling()};
  }
  std::vector<CausalOrderSpec> orders;
  if (!scenario.order().empty()) orders.push_back(CausalOrderSpec::general(scenario.order()));
  orders.push_back(CausalOrderSpec::no_signalling());
  return orders;
}

template <Scalar T>
std::vector<FractionResult<T>> full_report(const BasicEmpiricalModel<T>& model,
                                           MethodChoice choice, const FractionOptions& options) {
  std::vector<FractionResult<T>> out;
  for (const auto& order : report_orders(model.scenario())) {
    out.push_back(compute_fraction(model, order, choice, options));
  }
  return out;
}

#define CAUFRAC_INSTANTIATE(T)                                                                   \
  template T upper_bound_fraction(const BasicEmpiricalModel<T>&, const CausalOrderSpec&);        \
  template FractionResult<T> bell222_fraction(const BasicEmpiricalModel<T>&,                     \
                                              const CausalOrderSpec&, double);                   \
  template FractionResult<T> lp_fraction(const BasicEmpiricalModel<T>&, const CausalOrderSpec&,  \
                                         const FractionOptions&);                                \
  template FractionResult<T> section_mixture_fraction(                                           \
      const BasicEmpiricalModel<T>&, const CausalOrderSpec&, const FractionOptions&);            \
  template FractionResult<T> nosignalling_fraction(const BasicEmpiricalModel<T>&,                \
                                                   const FractionOptions&);                      \
  template bool witness_check(const BasicEmpiricalModel<T>&, const T&,                           \
                              const BasicEmpiricalModel<T>&, double);                            \
  template FractionResult<T> compute_fraction(const BasicEmpiricalModel<T>&,                     \
                                              const CausalOrderSpec&, MethodChoice,              \
                                              const FractionOptions&);                           \
  template std::vector<FractionResult<T>> full_report(const BasicEmpiricalModel<T>&,             \
                                                      MethodChoice, const FractionOptions&);

CAUFRAC_INSTANTIATE(Rational)
CAUFRAC_INSTANTIATE(double)

#undef CAUFRAC_INSTANTIATE

}  // namespace caufrac
