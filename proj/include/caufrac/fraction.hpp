#pragma once

#include <optional>
#include <string>
#include <vector>

#include "caufrac/empirical_model.hpp"
#include "caufrac/lp.hpp"

namespace caufrac {

/// The causal order a fraction is measured against.
class CausalOrderSpec {
 public:
  enum class Kind { chain, no_signalling, general };

  /// `first` → `second`.
  static CausalOrderSpec chain(std::string first, std::string second);
  /// The antichain: no event precedes another.
  static CausalOrderSpec no_signalling();
  static CausalOrderSpec general(OrderRelation relation);

  Kind kind() const { return kind_; }
  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }
  const OrderRelation& relation() const { return relation_; }

  /// "A->B", "NS", or "poset[A->C,B->C]".
  std::string label() const;

  /// The model's events and alphabets under this order. Throws
  /// UnknownEventError or CycleError.
  CausalScenario apply_to(const CausalScenario& scenario) const;

  friend bool operator==(const CausalOrderSpec&, const CausalOrderSpec&) = default;

 private:
  Kind kind_ = Kind::no_signalling;
  std::string first_;
  std::string second_;
  OrderRelation relation_;
};

enum class FractionMethod { closed_form, upper_bound, lp, section_mixture };

std::string method_name(FractionMethod method);

template <Scalar T>
struct FractionResult {
  CausalOrderSpec order;
  T gamma{};
  FractionMethod method = FractionMethod::lp;
  /// The compatible model attaining gamma; omitted when gamma = 0.
  std::optional<BasicEmpiricalModel<T>> witness;
};

struct FractionOptions {
  double tolerance = kDefaultTolerance;
  std::size_t section_cap = kDefaultSectionCap;
  lp::SolveOptions solver;
};

/// Minimum over pairs of joint input strings, every lowerset below their
/// (pruned) meet and every output on it, of 1 − |difference of marginals|.
template <Scalar T>
T upper_bound_fraction(const BasicEmpiricalModel<T>& model, const CausalOrderSpec& order);

/// True for two events, each with two inputs and two outputs.
bool is_bell222(const CausalScenario& scenario);

/// Closed form for a chain order on a (2,2,2) model with the witness from the
/// constructive proof. Throws ShapeError.
template <Scalar T>
FractionResult<T> bell222_fraction(const BasicEmpiricalModel<T>& model,
                                   const CausalOrderSpec& order,
                                   double tolerance = kDefaultTolerance);

/// Largest gamma with gamma·w ⪯ model for some compatible family w on the
/// order, as a linear program over the unnormalized table c = gamma·w with
/// marginal-equality constraints on every lowerset.
template <Scalar T>
FractionResult<T> lp_fraction(const BasicEmpiricalModel<T>& model, const CausalOrderSpec& order,
                              const FractionOptions& options = {});

/// Same objective over convex mixtures of deterministic sections of the event
/// sheaf. Equals lp_fraction on chains; can be smaller on orders with
/// incomparable events.
template <Scalar T>
FractionResult<T> section_mixture_fraction(const BasicEmpiricalModel<T>& model,
                                           const CausalOrderSpec& order,
                                           const FractionOptions& options = {});

/// lp_fraction with the antichain. On (2,2,2) models the result is checked
/// against the program imposing both chain orders' constraints at once.
template <Scalar T>
FractionResult<T> nosignalling_fraction(const BasicEmpiricalModel<T>& model,
                                        const FractionOptions& options = {});

/// gamma·witness ⪯ model cellwise and the witness is a compatible family for
/// its own scenario's order. gamma = 0 is always accepted.
template <Scalar T>
bool witness_check(const BasicEmpiricalModel<T>& model, const T& gamma,
                   const BasicEmpiricalModel<T>& witness, double tolerance = kDefaultTolerance);

enum class MethodChoice { automatic, closed, lp, bound };

MethodChoice parse_method_choice(const std::string& text);
std::string method_choice_name(MethodChoice choice);

template <Scalar T>
FractionResult<T> compute_fraction(const BasicEmpiricalModel<T>& model,
                                   const CausalOrderSpec& order, MethodChoice choice,
                                   const FractionOptions& options = {});

/// Orders reported for a model: both chains and NS for two events; the
/// declared order and NS otherwise.
std::vector<CausalOrderSpec> report_orders(const CausalScenario& scenario);

/// compute_fraction for every order in report_orders.
template <Scalar T>
std::vector<FractionResult<T>> full_report(const BasicEmpiricalModel<T>& model,
                                           MethodChoice choice = MethodChoice::automatic,
                                           const FractionOptions& options = {});

}  // namespace caufrac
