#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace caufrac {

/// Positions into an event's alphabets, one entry per in-scope event.
using Assignment = std::vector<std::size_t>;

/// Bitmask over event indices (declaration order).
using EventMask = std::uint64_t;

inline constexpr std::size_t kMaxEvents = 64;
inline constexpr std::size_t kDefaultSectionCap = 1'000'000;

struct Event {
  std::string id;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  friend bool operator==(const Event&, const Event&) = default;
};

using OrderRelation = std::vector<std::pair<std::string, std::string>>;

/// A set of events. Whether it is downward closed depends on the scenario;
/// see CausalScenario::is_lowerset.
class Lowerset {
 public:
  Lowerset() = default;
  explicit Lowerset(EventMask mask) : mask_(mask) {}

  EventMask mask() const { return mask_; }
  bool contains(std::size_t event) const { return (mask_ >> event) & 1U; }
  bool empty() const { return mask_ == 0; }
  std::size_t size() const;
  std::vector<std::size_t> members() const;
  bool is_subset_of(const Lowerset& other) const { return (mask_ & ~other.mask_) == 0; }

  friend bool operator==(const Lowerset&, const Lowerset&) = default;

 private:
  EventMask mask_ = 0;
};

/// Mixed-radix encoding of joint assignments; the first position is the
/// most significant, so input (0,1) precedes (1,0).
class JointIndexer {
 public:
  JointIndexer() = default;
  explicit JointIndexer(std::vector<std::size_t> radices);

  std::size_t size() const { return size_; }
  std::size_t arity() const { return radices_.size(); }
  const std::vector<std::size_t>& radices() const { return radices_; }

  std::size_t encode(std::span<const std::size_t> digits) const;
  Assignment decode(std::size_t index) const;

 private:
  std::vector<std::size_t> radices_;
  std::size_t size_ = 1;
};

/// Finite poset of events with per-event input and output alphabets.
/// Immutable once validated.
class CausalScenario {
 public:
  /// Throws CycleError, EmptyAlphabetError, UnknownEventError,
  /// DuplicateLabelError or SizeLimitError.
  static CausalScenario validate(std::vector<Event> events, OrderRelation order);

  const std::vector<Event>& events() const { return events_; }
  const Event& event(std::size_t index) const { return events_.at(index); }
  std::size_t num_events() const { return events_.size(); }
  const OrderRelation& order() const { return order_; }

  std::size_t index_of(std::string_view id) const;

  /// Reflexive-transitive closure: `before` ≤ `after`.
  bool precedes_or_equal(std::size_t before, std::size_t after) const;
  EventMask down_set(std::size_t event) const { return down_.at(event); }
  bool is_lowerset(EventMask mask) const;
  /// Largest lowerset contained in `mask`.
  Lowerset largest_lowerset_within(EventMask mask) const;

  Lowerset full() const;
  EventMask full_mask() const;

  /// Joint input/output indexers over the events of `mask`, in declaration order.
  JointIndexer input_indexer(EventMask mask) const;
  JointIndexer output_indexer(EventMask mask) const;
  JointIndexer input_indexer() const { return input_indexer(full_mask()); }
  JointIndexer output_indexer() const { return output_indexer(full_mask()); }

  /// Same events and alphabets, different causal order.
  CausalScenario with_order(OrderRelation order) const;

  /// Same events and alphabets (order is ignored).
  bool same_shape(const CausalScenario& other) const { return events_ == other.events_; }

  friend bool operator==(const CausalScenario& a, const CausalScenario& b) {
    return a.events_ == b.events_ && a.down_ == b.down_;
  }

 private:
  std::vector<Event> events_;
  OrderRelation order_;
  std::vector<EventMask> down_;
};

/// Every lowerset of the scenario, sorted by size then lexicographically by
/// member indices. Includes the empty set and the full event set.
std::vector<Lowerset> lowersets(const CausalScenario& scenario);

/// Lowerset paired with a nonempty input restriction per member event.
struct LocaleElement {
  Lowerset lowerset;
  /// Indexed by event; sorted input positions for members, empty otherwise.
  std::vector<std::vector<std::size_t>> inputs;

  friend bool operator==(const LocaleElement&, const LocaleElement&) = default;
};

/// Full-input element over a lowerset (U_ω = I_ω).
LocaleElement full_element(const CausalScenario& scenario, Lowerset lowerset);
LocaleElement full_element(const CausalScenario& scenario);
/// Singleton restriction `(Ω, {i})` of a joint input string.
LocaleElement context_element(const CausalScenario& scenario, const Assignment& joint_input);
/// Normalizes (sort, dedupe) and validates. Throws NotLowersetError, ShapeError.
LocaleElement make_locale_element(const CausalScenario& scenario, Lowerset lowerset,
                                  std::vector<std::vector<std::size_t>> inputs);

bool locale_leq(const LocaleElement& below, const LocaleElement& above);
LocaleElement locale_join(const CausalScenario& scenario, const LocaleElement& a,
                          const LocaleElement& b);
/// Componentwise intersection; events with an empty intersection are dropped
/// and the result is pruned to the largest lowerset it contains.
LocaleElement locale_meet(const CausalScenario& scenario, const LocaleElement& a,
                          const LocaleElement& b);

/// A function from the joint inputs of a locale element to joint outputs of
/// its lowerset. Inputs are enumerated canonically (declaration order,
/// restricted alphabets in increasing position).
class CausalFunction {
 public:
  CausalFunction(LocaleElement domain, std::vector<Assignment> inputs,
                 std::vector<Assignment> outputs);

  const LocaleElement& domain() const { return domain_; }
  const std::vector<Assignment>& inputs() const { return inputs_; }
  const std::vector<Assignment>& outputs() const { return outputs_; }
  std::size_t size() const { return inputs_.size(); }

  /// Throws DomainMismatchError if `input` is not in the domain.
  const Assignment& at(const Assignment& input) const;

  friend bool operator==(const CausalFunction&, const CausalFunction&) = default;

 private:
  LocaleElement domain_;
  std::vector<Assignment> inputs_;
  std::vector<Assignment> outputs_;
};

/// Canonical enumeration of the joint inputs of a locale element.
std::vector<Assignment> domain_inputs(const LocaleElement& elem);

CausalScenario validate_scenario(std::vector<Event> events, OrderRelation order);

/// True iff outputs restricted to each member's down-set depend only on the
/// inputs of that down-set. Throws DomainMismatchError when the table is not
/// total on the declared domain or references unknown labels.
bool is_causal_function(const CausalFunction& f, const CausalScenario& scenario);

/// Sections of the event sheaf over `elem`. Throws SizeLimitError when the
/// count would exceed `cap`.
std::vector<CausalFunction> enumerate_sections(const CausalScenario& scenario,
                                               const LocaleElement& elem,
                                               std::size_t cap = kDefaultSectionCap);

/// Number of sections over `elem`, saturating at SIZE_MAX.
std::size_t count_sections(const CausalScenario& scenario, const LocaleElement& elem);

/// Throws NotBelowError unless `to` ≤ `from`.
CausalFunction restrict_section(const CausalScenario& scenario, const CausalFunction& f,
                                const LocaleElement& to);
/// As above, additionally checking that `from` is the domain of `f`.
CausalFunction restrict_section(const CausalScenario& scenario, const CausalFunction& f,
                                const LocaleElement& from, const LocaleElement& to);

}  // namespace caufrac
