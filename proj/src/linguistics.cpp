#include "caufrac/linguistics.hpp"

#include <optional>
#include <set>

#include "caufrac/csv.hpp"
#include "caufrac/errors.hpp"
#include "caufrac/parallel.hpp"

namespace caufrac::ling {

using nlohmann::json;

std::string phrase_type_name(PhraseType type) {
  return type == PhraseType::subject_verb ? "subject_verb" : "verb_object";
}

PhraseType parse_phrase_type(const std::string& text) {
  if (text == "subject_verb") return PhraseType::subject_verb;
  if (text == "verb_object") return PhraseType::verb_object;
  throw ParseError("phrase_type must be subject_verb or verb_object, got '" + text + "'");
}

std::string ambiguity_name(Ambiguity a) {
  return a == Ambiguity::homonymous ? "homonymous" : "polysemous";
}

Ambiguity parse_ambiguity(const std::string& text) {
  if (text == "homonymous") return Ambiguity::homonymous;
  if (text == "polysemous") return Ambiguity::polysemous;
  throw ParseError("ambiguity must be homonymous or polysemous, got '" + text + "'");
}

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

int parse_int(const std::string& text, int lo, int hi, const char* field, std::size_t line) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ParseError(at_line(line) + field + " must be an integer, got '" + text + "'");
  }
  if (value < lo || value > hi) {
    throw ParseError(at_line(line) + field + " must be in " + std::to_string(lo) + ".." +
                     std::to_string(hi) + ", got " + text);
  }
  return value;
}

const std::string& nonempty(const std::string& value, const char* field, std::size_t line) {
  if (value.empty()) throw ParseError(at_line(line) + field + " is empty");
  return value;
}

template <class Fn>
auto with_line(std::size_t line, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(at_line(line) + e.what());
  }
}

}  // namespace

std::vector<AnnotationRecord> read_annotations(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t c_worker = table.column("worker_id");
  const std::size_t c_phrase = table.column("phrase_id");
  const std::size_t c_comb = table.column("combination_id");
  const std::size_t c_score = table.column("score");
  std::vector<AnnotationRecord> out;
  for (const auto& row : table.rows) {
    AnnotationRecord r;
    r.line = row.line;
    r.worker_id = nonempty(row.fields[c_worker], "worker_id", row.line);
    r.phrase_id = nonempty(row.fields[c_phrase], "phrase_id", row.line);
    r.combination_id = parse_int(row.fields[c_comb], 1, 4, "combination_id", row.line);
    r.score = parse_int(row.fields[c_score], kMinScore, kMaxScore, "score", row.line);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PhraseEntry> read_phrases(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t c_id = table.column("phrase_id");
  const std::size_t c_type = table.column("phrase_type");
  const std::size_t c_noun = table.column("noun");
  const std::size_t c_verb = table.column("verb");
  const std::size_t c_na = table.column("noun_ambiguity");
  const std::size_t c_va = table.column("verb_ambiguity");
  std::array<std::size_t, 4> c_gloss;
  for (std::size_t k = 0; k < 4; ++k) c_gloss[k] = table.column("gloss" + std::to_string(k + 1));
  std::vector<PhraseEntry> out;
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    PhraseEntry p;
    p.phrase_id = nonempty(f[c_id], "phrase_id", row.line);
    p.type = with_line(row.line, [&] { return parse_phrase_type(f[c_type]); });
    p.noun = nonempty(f[c_noun], "noun", row.line);
    p.verb = nonempty(f[c_verb], "verb", row.line);
    p.noun_ambiguity = with_line(row.line, [&] { return parse_ambiguity(f[c_na]); });
    p.verb_ambiguity = with_line(row.line, [&] { return parse_ambiguity(f[c_va]); });
    for (std::size_t k = 0; k < 4; ++k) p.glosses[k] = f[c_gloss[k]];
    if (p.noun.find(',') != std::string::npos || p.verb.find(',') != std::string::npos) {
      throw ParseError(at_line(row.line) + "words must not contain ','");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<BellModelSpec> read_specs(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t c_id = table.column("model_id");
  const std::size_t c_type = table.column("phrase_type");
  const std::array<std::size_t, 4> c_cells{table.column("cell_00"), table.column("cell_01"),
                                           table.column("cell_10"), table.column("cell_11")};
  std::vector<BellModelSpec> out;
  std::set<std::string> ids;
  for (const auto& row : table.rows) {
    BellModelSpec s;
    s.line = row.line;
    s.model_id = nonempty(row.fields[c_id], "model_id", row.line);
    if (!ids.insert(s.model_id).second) {
      throw DuplicateLabelError(at_line(row.line) + "duplicate model_id '" + s.model_id + "'");
    }
    s.type = with_line(row.line, [&] { return parse_phrase_type(row.fields[c_type]); });
    for (std::size_t k = 0; k < 4; ++k) s.cells[k] = nonempty(row.fields[c_cells[k]], "cell", row.line);
    out.push_back(std::move(s));
  }
  return out;
}

PhraseDistribution aggregate_scores(const std::vector<AnnotationRecord>& records,
                                    const AggregateOptions& options) {
  if (records.empty()) throw MissingCombinationError("no annotation records");
  const std::string& phrase = records.front().phrase_id;
  std::array<Rational, 4> sum;
  std::array<long, 4> count{};
  std::set<std::pair<std::string, int>> seen;
  std::set<std::string> workers;
  for (const auto& r : records) {
    if (r.phrase_id != phrase) {
      throw ParseError("records for more than one phrase: '" + phrase + "' and '" + r.phrase_id +
                       "'");
    }
    if (r.combination_id < 1 || r.combination_id > 4) {
      throw ParseError(at_line(r.line) + "combination_id out of range");
    }
    if (r.score < kMinScore || r.score > kMaxScore) {
      throw ParseError(at_line(r.line) + "score out of range");
    }
    if (!seen.emplace(r.worker_id, r.combination_id).second) {
      throw ParseError(at_line(r.line) + "worker '" + r.worker_id +
                       "' scored combination " + std::to_string(r.combination_id) +
                       " of phrase '" + phrase + "' twice");
    }
    if (options.drop_neutral && r.score == kNeutralScore) continue;
    const std::size_t k = static_cast<std::size_t>(r.combination_id - 1);
    sum[k] += r.score;
    ++count[k];
    workers.insert(r.worker_id);
  }
  std::array<Rational, 4> mean;
  Rational total;
  for (std::size_t k = 0; k < 4; ++k) {
    if (count[k] == 0) {
      throw MissingCombinationError("phrase '" + phrase + "' has no scores for combination " +
                                    std::to_string(k + 1));
    }
    mean[k] = sum[k] / count[k];
    total += mean[k];
  }
  if (total == 0) {
    throw DegenerateError("phrase '" + phrase + "' has mean score 0 on every combination");
  }
  PhraseDistribution d;
  d.phrase_id = phrase;
  d.n_annotators = workers.size();
  for (std::size_t k = 0; k < 4; ++k) {
    d.probs[k] = mean[k] / total;
    d.probs[k].canonicalize();
  }
  return d;
}

AggregationOutcome aggregate_all(const std::vector<AnnotationRecord>& records,
                                 const AggregateOptions& options, std::size_t jobs) {
  std::map<std::string, std::vector<AnnotationRecord>> groups;
  for (const auto& r : records) groups[r.phrase_id].push_back(r);
  std::vector<const std::vector<AnnotationRecord>*> order;
  for (const auto& [id, group] : groups) order.push_back(&group);

  struct Slot {
    std::optional<PhraseDistribution> dist;
    std::string failure;
  };
  std::vector<Slot> slots(order.size());
  parallel_for(order.size(), jobs, [&](std::size_t i) {
    try {
      slots[i].dist = aggregate_scores(*order[i], options);
    } catch (const MissingCombinationError& e) {
      slots[i].failure = e.kind() + ": " + e.what();
    } catch (const DegenerateError& e) {
      slots[i].failure = e.kind() + ": " + e.what();
    }
  });

  AggregationOutcome out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& id = order[i]->front().phrase_id;
    if (slots[i].dist) {
      out.distributions.emplace(id, std::move(*slots[i].dist));
    } else {
      out.failures.emplace(id, slots[i].failure);
    }
  }
  return out;
}

PhraseIndex index_phrases(const std::vector<PhraseEntry>& phrases) {
  PhraseIndex index;
  for (const auto& p : phrases) {
    if (!index.emplace(p.phrase_id, p).second) {
      throw DuplicateLabelError("duplicate phrase_id '" + p.phrase_id + "'");
    }
  }
  return index;
}

namespace {

struct Grid {
  std::array<const PhraseEntry*, 4> cells{};
  std::array<std::string, 2> word1;
  std::array<std::string, 2> word2;
  std::array<Ambiguity, 2> word1_amb{};
  std::array<Ambiguity, 2> word2_amb{};
};

Grid resolve(const BellModelSpec& spec, const PhraseIndex& phrases) {
  const std::string where = "model '" + spec.model_id + "': ";
  Grid g;
  for (std::size_t k = 0; k < 4; ++k) {
    auto it = phrases.find(spec.cells[k]);
    if (it == phrases.end()) {
      throw UnresolvedPhraseError(where + "unknown phrase_id '" + spec.cells[k] + "'");
    }
    if (it->second.type != spec.type) {
      throw TypeMixError(where + "phrase '" + spec.cells[k] + "' is " +
                         phrase_type_name(it->second.type) + ", model is " +
                         phrase_type_name(spec.type));
    }
    g.cells[k] = &it->second;
  }
  auto same = [&](const std::string& a, const std::string& b, const char* what) {
    if (a != b) {
      throw SpecShapeError(where + what + " differs across a row or column ('" + a + "' vs '" +
                           b + "')");
    }
  };
  auto same_amb = [&](Ambiguity a, Ambiguity b, const std::string& word) {
    if (a != b) throw SpecShapeError(where + "conflicting ambiguity labels for '" + word + "'");
  };
  for (std::size_t i = 0; i < 2; ++i) {
    const PhraseEntry& a = *g.cells[2 * i];
    const PhraseEntry& b = *g.cells[2 * i + 1];
    same(a.word1(), b.word1(), "word 1");
    same_amb(a.word1_ambiguity(), b.word1_ambiguity(), a.word1());
    g.word1[i] = a.word1();
    g.word1_amb[i] = a.word1_ambiguity();
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const PhraseEntry& a = *g.cells[j];
    const PhraseEntry& b = *g.cells[2 + j];
    same(a.word2(), b.word2(), "word 2");
    same_amb(a.word2_ambiguity(), b.word2_ambiguity(), a.word2());
    g.word2[j] = a.word2();
    g.word2_amb[j] = a.word2_ambiguity();
  }
  if (g.word1[0] == g.word1[1] || g.word2[0] == g.word2[1]) {
    throw SpecShapeError(where + "each event needs two distinct words");
  }
  return g;
}

}  // namespace

void check_spec(const BellModelSpec& spec, const PhraseIndex& phrases) { resolve(spec, phrases); }

RationalModel build_bell_model(const BellModelSpec& spec, const PhraseIndex& phrases,
                               const std::map<std::string, PhraseDistribution>& dists) {
  const Grid g = resolve(spec, phrases);
  const bool sv = spec.type == PhraseType::subject_verb;
  const std::array<std::string, 2> ids = sv ? std::array<std::string, 2>{"S", "V"}
                                            : std::array<std::string, 2>{"V", "O"};
  const std::array<std::string, 2> roles = sv ? std::array<std::string, 2>{"noun", "verb"}
                                              : std::array<std::string, 2>{"verb", "noun"};
  std::vector<Event> events{
      {ids[0], {g.word1[0], g.word1[1]}, {"0", "1"}},
      {ids[1], {g.word2[0], g.word2[1]}, {"0", "1"}},
  };
  CausalScenario scenario = CausalScenario::validate(std::move(events), {});

  std::vector<std::vector<Rational>> rows;
  for (std::size_t k = 0; k < 4; ++k) {
    auto it = dists.find(spec.cells[k]);
    if (it == dists.end()) {
      throw UnresolvedPhraseError("model '" + spec.model_id + "': phrase '" + spec.cells[k] +
                                  "' has no aggregated distribution");
    }
    rows.emplace_back(it->second.probs.begin(), it->second.probs.end());
  }

  auto words = [](const std::array<std::string, 2>& w, const std::array<Ambiguity, 2>& a) {
    json out = json::array();
    for (std::size_t k = 0; k < 2; ++k) {
      out.push_back({{"word", w[k]}, {"ambiguity", ambiguity_name(a[k])}});
    }
    return out;
  };
  json meta = {
      {"model_id", spec.model_id},
      {"phrase_type", phrase_type_name(spec.type)},
      {"events",
       {{ids[0], {{"role", roles[0]}, {"words", words(g.word1, g.word1_amb)}}},
        {ids[1], {{"role", roles[1]}, {"words", words(g.word2, g.word2_amb)}}}}},
      {"phrases", spec.cells},
  };
  return RationalModel::from_table(std::move(scenario), std::move(rows), 0.0, std::move(meta));
}

AmbiguityCounts ambiguity_counts(const json& meta) {
  if (!meta.is_object() || !meta.contains("events") || !meta.at("events").is_object()) {
    throw MissingMetaError("model meta has no event ambiguity labels");
  }
  AmbiguityCounts counts;
  bool noun = false;
  bool verb = false;
  for (const auto& [id, ev] : meta.at("events").items()) {
    if (!ev.is_object() || !ev.contains("role") || !ev.contains("words") ||
        !ev.at("words").is_array()) {
      throw MissingMetaError("event '" + id + "' lacks role or word labels");
    }
    const std::string role = ev.at("role").get<std::string>();
    int homonymous = 0;
    for (const auto& w : ev.at("words")) {
      if (!w.is_object() || !w.contains("ambiguity") || !w.at("ambiguity").is_string()) {
        throw MissingMetaError("event '" + id + "' has a word without an ambiguity label");
      }
      try {
        if (parse_ambiguity(w.at("ambiguity").get<std::string>()) == Ambiguity::homonymous) {
          ++homonymous;
        }
      } catch (const ParseError& e) {
        throw MissingMetaError(e.what());
      }
    }
    if (role == "noun") {
      counts.noun_homonymous = homonymous;
      noun = true;
    } else if (role == "verb") {
      counts.verb_homonymous = homonymous;
      verb = true;
    } else {
      throw MissingMetaError("event '" + id + "' has unknown role '" + role + "'");
    }
  }
  if (!noun || !verb) throw MissingMetaError("model meta needs one noun and one verb event");
  return counts;
}

}  // namespace caufrac::ling
