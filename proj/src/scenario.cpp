#include "caufrac/scenario.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

#include "caufrac/errors.hpp"

namespace caufrac {

std::size_t Lowerset::size() const { return static_cast<std::size_t>(std::popcount(mask_)); }

std::vector<std::size_t> Lowerset::members() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < kMaxEvents; ++k) {
    if (contains(k)) out.push_back(k);
  }
  return out;
}

JointIndexer::JointIndexer(std::vector<std::size_t> radices) : radices_(std::move(radices)) {
  size_ = 1;
  for (std::size_t r : radices_) size_ *= r;
}

std::size_t JointIndexer::encode(std::span<const std::size_t> digits) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < radices_.size(); ++k) index = index * radices_[k] + digits[k];
  return index;
}

Assignment JointIndexer::decode(std::size_t index) const {
  Assignment digits(radices_.size());
  for (std::size_t k = radices_.size(); k-- > 0;) {
    digits[k] = index % radices_[k];
    index /= radices_[k];
  }
  return digits;
}

namespace {

void check_alphabet(const std::string& event, const std::vector<std::string>& labels,
                    const char* what) {
  if (labels.empty()) {
    throw EmptyAlphabetError("event '" + event + "' has an empty " + what + " alphabet");
  }
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second) {
      throw DuplicateLabelError("event '" + event + "' repeats " + what + " label '" + label +
                                "'");
    }
  }
}

}  // namespace

CausalScenario CausalScenario::validate(std::vector<Event> events, OrderRelation order) {
  if (events.size() > kMaxEvents) {
    throw SizeLimitError("scenarios are limited to " + std::to_string(kMaxEvents) + " events");
  }
  std::set<std::string> ids;
  for (const auto& ev : events) {
    if (!ids.insert(ev.id).second) throw DuplicateLabelError("duplicate event id '" + ev.id + "'");
    check_alphabet(ev.id, ev.inputs, "input");
    check_alphabet(ev.id, ev.outputs, "output");
  }

  CausalScenario s;
  s.events_ = std::move(events);
  const std::size_t n = s.events_.size();

  // below[b] has bit a set iff a ≤ b.
  std::vector<EventMask> below(n);
  for (std::size_t k = 0; k < n; ++k) below[k] = EventMask{1} << k;
  for (const auto& [before, after] : order) {
    std::size_t a = s.index_of(before);
    std::size_t b = s.index_of(after);
    below[b] |= EventMask{1} << a;
  }
  // Warshall-style closure over bitmasks.
  for (std::size_t mid = 0; mid < n; ++mid) {
    for (std::size_t b = 0; b < n; ++b) {
      if ((below[b] >> mid) & 1U) below[b] |= below[mid];
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (((below[b] >> a) & 1U) && ((below[a] >> b) & 1U)) {
        throw CycleError("causal order has a directed cycle through '" + s.events_[a].id +
                         "' and '" + s.events_[b].id + "'");
      }
    }
  }
  s.down_ = std::move(below);
  s.order_ = std::move(order);
  return s;
}

CausalScenario validate_scenario(std::vector<Event> events, OrderRelation order) {
  return CausalScenario::validate(std::move(events), std::move(order));
}

std::size_t CausalScenario::index_of(std::string_view id) const {
  for (std::size_t k = 0; k < events_.size(); ++k) {
    if (events_[k].id == id) return k;
  }
  throw UnknownEventError("unknown event '" + std::string(id) + "'");
}

bool CausalScenario::precedes_or_equal(std::size_t before, std::size_t after) const {
  return (down_.at(after) >> before) & 1U;
}

bool CausalScenario::is_lowerset(EventMask mask) const {
  if ((mask & ~full_mask()) != 0) return false;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    if (((mask >> k) & 1U) && (down_[k] & ~mask) != 0) return false;
  }
  return true;
}

Lowerset CausalScenario::largest_lowerset_within(EventMask mask) const {
  mask &= full_mask();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < events_.size(); ++k) {
      if (((mask >> k) & 1U) && (down_[k] & ~mask) != 0) {
        mask &= ~(EventMask{1} << k);
        changed = true;
      }
    }
  }
  return Lowerset(mask);
}

EventMask CausalScenario::full_mask() const {
  return events_.size() == kMaxEvents ? ~EventMask{0} : (EventMask{1} << events_.size()) - 1;
}

Lowerset CausalScenario::full() const { return Lowerset(full_mask()); }

JointIndexer CausalScenario::input_indexer(EventMask mask) const {
  std::vector<std::size_t> radices;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    if ((mask >> k) & 1U) radices.push_back(events_[k].inputs.size());
  }
  return JointIndexer(std::move(radices));
}

JointIndexer CausalScenario::output_indexer(EventMask mask) const {
  std::vector<std::size_t> radices;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    if ((mask >> k) & 1U) radices.push_back(events_[k].outputs.size());
  }
  return JointIndexer(std::move(radices));
}

CausalScenario CausalScenario::with_order(OrderRelation order) const {
  return validate(events_, std::move(order));
}

std::vector<Lowerset> lowersets(const CausalScenario& scenario) {
  const std::size_t n = scenario.num_events();
  std::vector<Lowerset> out;
  if (n <= 20) {
    for (EventMask m = 0; m <= scenario.full_mask(); ++m) {
      if (scenario.is_lowerset(m)) out.emplace_back(m);
    }
  } else {
    // Grow lowersets by adding events whose strict down-set is already in.
    std::set<EventMask> seen{0};
    std::vector<EventMask> frontier{0};
    while (!frontier.empty()) {
      std::vector<EventMask> next;
      for (EventMask m : frontier) {
        for (std::size_t k = 0; k < n; ++k) {
          EventMask bit = EventMask{1} << k;
          if ((m & bit) == 0 && (scenario.down_set(k) & ~bit & ~m) == 0) {
            if (seen.insert(m | bit).second) next.push_back(m | bit);
          }
        }
      }
      frontier = std::move(next);
    }
    for (EventMask m : seen) out.emplace_back(m);
  }
  std::sort(out.begin(), out.end(), [](const Lowerset& a, const Lowerset& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.members() < b.members();
  });
  return out;
}

LocaleElement full_element(const CausalScenario& scenario, Lowerset lowerset) {
  LocaleElement elem{lowerset, std::vector<std::vector<std::size_t>>(scenario.num_events())};
  for (std::size_t k : lowerset.members()) {
    auto& inputs = elem.inputs[k];
    inputs.resize(scenario.event(k).inputs.size());
    for (std::size_t v = 0; v < inputs.size(); ++v) inputs[v] = v;
  }
  return elem;
}

LocaleElement full_element(const CausalScenario& scenario) {
  return full_element(scenario, scenario.full());
}

LocaleElement context_element(const CausalScenario& scenario, const Assignment& joint_input) {
  if (joint_input.size() != scenario.num_events()) {
    throw ShapeError("joint input has " + std::to_string(joint_input.size()) +
                     " entries, scenario has " + std::to_string(scenario.num_events()) +
                     " events");
  }
  LocaleElement elem{scenario.full(), std::vector<std::vector<std::size_t>>(scenario.num_events())};
  for (std::size_t k = 0; k < joint_input.size(); ++k) {
    if (joint_input[k] >= scenario.event(k).inputs.size()) {
      throw ShapeError("input position out of range for event '" + scenario.event(k).id + "'");
    }
    elem.inputs[k] = {joint_input[k]};
  }
  return elem;
}

LocaleElement make_locale_element(const CausalScenario& scenario, Lowerset lowerset,
                                  std::vector<std::vector<std::size_t>> inputs) {
  if (!scenario.is_lowerset(lowerset.mask())) {
    throw NotLowersetError("event set is not downward closed");
  }
  if (inputs.size() != scenario.num_events()) {
    throw ShapeError("locale element needs one input list per event");
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto& u = inputs[k];
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    if (!lowerset.contains(k)) {
      u.clear();
      continue;
    }
    if (u.empty()) {
      throw ShapeError("empty input restriction for event '" + scenario.event(k).id + "'");
    }
    if (u.back() >= scenario.event(k).inputs.size()) {
      throw ShapeError("input position out of range for event '" + scenario.event(k).id + "'");
    }
  }
  return LocaleElement{lowerset, std::move(inputs)};
}

bool locale_leq(const LocaleElement& below, const LocaleElement& above) {
  if (!below.lowerset.is_subset_of(above.lowerset)) return false;
  for (std::size_t k : below.lowerset.members()) {
    const auto& u = below.inputs[k];
    const auto& v = above.inputs[k];
    if (!std::includes(v.begin(), v.end(), u.begin(), u.end())) return false;
  }
  return true;
}

LocaleElement locale_join(const CausalScenario& scenario, const LocaleElement& a,
                          const LocaleElement& b) {
  std::vector<std::vector<std::size_t>> inputs(scenario.num_events());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::set_union(a.inputs[k].begin(), a.inputs[k].end(), b.inputs[k].begin(),
                   b.inputs[k].end(), std::back_inserter(inputs[k]));
  }
  return LocaleElement{Lowerset(a.lowerset.mask() | b.lowerset.mask()), std::move(inputs)};
}

LocaleElement locale_meet(const CausalScenario& scenario, const LocaleElement& a,
                          const LocaleElement& b) {
  std::vector<std::vector<std::size_t>> inputs(scenario.num_events());
  EventMask common = 0;
  for (std::size_t k : Lowerset(a.lowerset.mask() & b.lowerset.mask()).members()) {
    std::set_intersection(a.inputs[k].begin(), a.inputs[k].end(), b.inputs[k].begin(),
                          b.inputs[k].end(), std::back_inserter(inputs[k]));
    if (!inputs[k].empty()) common |= EventMask{1} << k;
  }
  Lowerset pruned = scenario.largest_lowerset_within(common);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!pruned.contains(k)) inputs[k].clear();
  }
  return LocaleElement{pruned, std::move(inputs)};
}

std::vector<Assignment> domain_inputs(const LocaleElement& elem) {
  const auto members = elem.lowerset.members();
  std::vector<Assignment> out;
  Assignment pos(members.size(), 0);
  while (true) {
    Assignment input(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) input[k] = elem.inputs[members[k]][pos[k]];
    out.push_back(std::move(input));
    std::size_t k = members.size();
    while (k > 0) {
      --k;
      if (++pos[k] < elem.inputs[members[k]].size()) break;
      pos[k] = 0;
      if (k == 0) return out;
    }
    if (members.empty()) return out;
  }
}

CausalFunction::CausalFunction(LocaleElement domain, std::vector<Assignment> inputs,
                               std::vector<Assignment> outputs)
    : domain_(std::move(domain)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.size() != outputs_.size()) {
    throw DomainMismatchError("causal function table has mismatched input/output columns");
  }
}

const Assignment& CausalFunction::at(const Assignment& input) const {
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    if (inputs_[k] == input) return outputs_[k];
  }
  throw DomainMismatchError("input not in the function's domain");
}

namespace {

// Positions (within the lowerset's member list) of the events in `mask`.
std::vector<std::size_t> positions_of(const std::vector<std::size_t>& members, EventMask mask) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < members.size(); ++p) {
    if ((mask >> members[p]) & 1U) out.push_back(p);
  }
  return out;
}

bool agree_on(const Assignment& a, const Assignment& b, const std::vector<std::size_t>& positions) {
  for (std::size_t p : positions) {
    if (a[p] != b[p]) return false;
  }
  return true;
}

void check_total(const CausalFunction& f, const CausalScenario& scenario) {
  const auto& elem = f.domain();
  if (elem.inputs.size() != scenario.num_events() ||
      !scenario.is_lowerset(elem.lowerset.mask())) {
    throw DomainMismatchError("function domain is not a locale element of the scenario");
  }
  const auto members = elem.lowerset.members();
  auto expected = domain_inputs(elem);
  std::vector<Assignment> seen = f.inputs();
  std::sort(seen.begin(), seen.end());
  std::sort(expected.begin(), expected.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end() || seen != expected) {
    throw DomainMismatchError("function table is not total on its declared input domain");
  }
  for (const auto& out : f.outputs()) {
    if (out.size() != members.size()) {
      throw DomainMismatchError("output assignment has the wrong arity");
    }
    for (std::size_t p = 0; p < members.size(); ++p) {
      if (out[p] >= scenario.event(members[p]).outputs.size()) {
        throw DomainMismatchError("output position out of range");
      }
    }
  }
}

}  // namespace

bool is_causal_function(const CausalFunction& f, const CausalScenario& scenario) {
  check_total(f, scenario);
  const auto members = f.domain().lowerset.members();
  for (std::size_t w : members) {
    const auto positions = positions_of(members, scenario.down_set(w));
    for (std::size_t a = 0; a < f.size(); ++a) {
      for (std::size_t b = a + 1; b < f.size(); ++b) {
        if (agree_on(f.inputs()[a], f.inputs()[b], positions) &&
            !agree_on(f.outputs()[a], f.outputs()[b], positions)) {
          return false;
        }
      }
    }
  }
  return true;
}

namespace {

struct LocalTables {
  std::vector<std::size_t> members;
  std::vector<Assignment> inputs;
  // per member: local domain size, output alphabet size
  std::vector<std::size_t> local_size;
  std::vector<std::size_t> out_size;
  // [input row][member] -> local domain index
  std::vector<std::vector<std::size_t>> local_index;
};

LocalTables local_tables(const CausalScenario& scenario, const LocaleElement& elem) {
  LocalTables t;
  t.members = elem.lowerset.members();
  t.inputs = domain_inputs(elem);
  t.local_index.assign(t.inputs.size(), std::vector<std::size_t>(t.members.size()));
  for (std::size_t m = 0; m < t.members.size(); ++m) {
    const std::size_t w = t.members[m];
    const auto positions = positions_of(t.members, scenario.down_set(w));
    // Local domain: product over the down-set of the restricted alphabets.
    std::vector<std::size_t> radices;
    for (std::size_t p : positions) radices.push_back(elem.inputs[t.members[p]].size());
    JointIndexer local(radices);
    t.local_size.push_back(local.size());
    t.out_size.push_back(scenario.event(w).outputs.size());
    for (std::size_t r = 0; r < t.inputs.size(); ++r) {
      Assignment digits;
      for (std::size_t p : positions) {
        const auto& u = elem.inputs[t.members[p]];
        digits.push_back(static_cast<std::size_t>(
            std::lower_bound(u.begin(), u.end(), t.inputs[r][p]) - u.begin()));
      }
      t.local_index[r][m] = local.encode(digits);
    }
  }
  return t;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < exp; ++k) out = saturating_mul(out, base);
  return out;
}

}  // namespace

std::size_t count_sections(const CausalScenario& scenario, const LocaleElement& elem) {
  std::size_t total = 1;
  for (std::size_t w : elem.lowerset.members()) {
    std::size_t local = 1;
    for (std::size_t v = 0; v < scenario.num_events(); ++v) {
      if (scenario.precedes_or_equal(v, w)) local = saturating_mul(local, elem.inputs[v].size());
    }
    total = saturating_mul(total, saturating_pow(scenario.event(w).outputs.size(), local));
  }
  return total;
}

std::vector<CausalFunction> enumerate_sections(const CausalScenario& scenario,
                                               const LocaleElement& elem, std::size_t cap) {
  if (!scenario.is_lowerset(elem.lowerset.mask())) {
    throw NotLowersetError("locale element is not over a lowerset");
  }
  const std::size_t count = count_sections(scenario, elem);
  if (count > cap) {
    throw SizeLimitError("section count " +
                         (count == std::numeric_limits<std::size_t>::max()
                              ? std::string("overflows")
                              : std::to_string(count)) +
                         " exceeds cap " + std::to_string(cap));
  }
  const LocalTables t = local_tables(scenario, elem);

  // Digits: for every member and every local input, the chosen output.
  std::vector<std::size_t> offset(t.members.size());
  std::vector<std::size_t> radix;
  for (std::size_t m = 0; m < t.members.size(); ++m) {
    offset[m] = radix.size();
    radix.insert(radix.end(), t.local_size[m], t.out_size[m]);
  }

  std::vector<CausalFunction> out;
  out.reserve(count);
  std::vector<std::size_t> digits(radix.size(), 0);
  while (true) {
    std::vector<Assignment> outputs(t.inputs.size(), Assignment(t.members.size()));
    for (std::size_t r = 0; r < t.inputs.size(); ++r) {
      for (std::size_t m = 0; m < t.members.size(); ++m) {
        outputs[r][m] = digits[offset[m] + t.local_index[r][m]];
      }
    }
    out.emplace_back(elem, t.inputs, std::move(outputs));
    std::size_t k = digits.size();
    bool done = true;
    while (k > 0) {
      --k;
      if (++digits[k] < radix[k]) {
        done = false;
        break;
      }
      digits[k] = 0;
    }
    if (done) break;
  }
  return out;
}

CausalFunction restrict_section(const CausalScenario& scenario, const CausalFunction& f,
                                const LocaleElement& to) {
  const LocaleElement& from = f.domain();
  if (!locale_leq(to, from)) throw NotBelowError("target locale element is not below the source");
  const auto from_members = from.lowerset.members();
  const auto to_positions = positions_of(from_members, to.lowerset.mask());
  (void)scenario;

  std::vector<Assignment> inputs = domain_inputs(to);
  std::vector<Assignment> outputs;
  outputs.reserve(inputs.size());
  for (const auto& input : inputs) {
    // Extend with the first admissible input on events outside `to`.
    Assignment extended(from_members.size());
    std::size_t next = 0;
    for (std::size_t p = 0; p < from_members.size(); ++p) {
      if (to.lowerset.contains(from_members[p])) {
        extended[p] = input[next++];
      } else {
        extended[p] = from.inputs[from_members[p]].front();
      }
    }
    const Assignment& full_out = f.at(extended);
    Assignment projected;
    for (std::size_t p : to_positions) projected.push_back(full_out[p]);
    outputs.push_back(std::move(projected));
  }
  return CausalFunction(to, std::move(inputs), std::move(outputs));
}

CausalFunction restrict_section(const CausalScenario& scenario, const CausalFunction& f,
                                const LocaleElement& from, const LocaleElement& to) {
  if (!(f.domain() == from)) throw DomainMismatchError("function is not defined on `from`");
  return restrict_section(scenario, f, to);
}

}  // namespace caufrac
