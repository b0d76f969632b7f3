#pragma once

#include <array>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "caufrac/empirical_model.hpp"

namespace caufrac::ling {

enum class PhraseType { subject_verb, verb_object };
enum class Ambiguity { homonymous, polysemous };

std::string phrase_type_name(PhraseType type);
PhraseType parse_phrase_type(const std::string& text);
std::string ambiguity_name(Ambiguity a);
Ambiguity parse_ambiguity(const std::string& text);

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 7;
inline constexpr int kNeutralScore = 4;

struct AnnotationRecord {
  std::string worker_id;
  std::string phrase_id;
  int combination_id = 1;  // 1..4
  int score = 0;           // 0..7
  std::size_t line = 0;
};

/// Combinations are ordered (sense of word 1, sense of word 2), word 1 being
/// the noun of a subject-verb phrase and the verb of a verb-object phrase.
struct PhraseEntry {
  std::string phrase_id;
  PhraseType type = PhraseType::subject_verb;
  std::string noun;
  std::string verb;
  Ambiguity noun_ambiguity = Ambiguity::polysemous;
  Ambiguity verb_ambiguity = Ambiguity::polysemous;
  std::array<std::string, 4> glosses;

  const std::string& word1() const { return type == PhraseType::subject_verb ? noun : verb; }
  const std::string& word2() const { return type == PhraseType::subject_verb ? verb : noun; }
  Ambiguity word1_ambiguity() const {
    return type == PhraseType::subject_verb ? noun_ambiguity : verb_ambiguity;
  }
  Ambiguity word2_ambiguity() const {
    return type == PhraseType::subject_verb ? verb_ambiguity : noun_ambiguity;
  }
};

struct PhraseDistribution {
  std::string phrase_id;
  std::array<Rational, 4> probs;
  std::size_t n_annotators = 0;
};

/// cells[2*i + j] is the phrase for word-1 input i and word-2 input j.
struct BellModelSpec {
  std::string model_id;
  PhraseType type = PhraseType::subject_verb;
  std::array<std::string, 4> cells;
  std::size_t line = 0;
};

/// Readers validate the schema; errors carry the line number.
std::vector<AnnotationRecord> read_annotations(std::istream& in);
std::vector<PhraseEntry> read_phrases(std::istream& in);
std::vector<BellModelSpec> read_specs(std::istream& in);

struct AggregateOptions {
  /// Ignore records at the neutral grade.
  bool drop_neutral = false;
};

/// Per-combination mean score divided by the sum of the four means, for the
/// records of a single phrase. Throws MissingCombinationError, DegenerateError,
/// ParseError (duplicate worker/combination pair or mixed phrase ids).
PhraseDistribution aggregate_scores(const std::vector<AnnotationRecord>& records,
                                    const AggregateOptions& options = {});

struct AggregationOutcome {
  std::map<std::string, PhraseDistribution> distributions;
  /// phrase id -> "<ErrorKind>: message"
  std::map<std::string, std::string> failures;
};

/// Groups by phrase and aggregates each group; per-phrase failures are
/// collected rather than thrown.
AggregationOutcome aggregate_all(const std::vector<AnnotationRecord>& records,
                                 const AggregateOptions& options = {}, std::size_t jobs = 1);

using PhraseIndex = std::map<std::string, PhraseEntry>;

/// Throws DuplicateLabelError on a repeated phrase id.
PhraseIndex index_phrases(const std::vector<PhraseEntry>& phrases);

/// Checks the four cells resolve, share the spec's type, and lay out a 2x2
/// grid of word pairs. Throws UnresolvedPhraseError, TypeMixError,
/// SpecShapeError.
void check_spec(const BellModelSpec& spec, const PhraseIndex& phrases);

/// Events ("S","V") or ("V","O"); inputs are the words, outputs "0","1".
/// Throws as check_spec, and UnresolvedPhraseError for a cell with no
/// distribution.
RationalModel build_bell_model(const BellModelSpec& spec, const PhraseIndex& phrases,
                               const std::map<std::string, PhraseDistribution>& dists);

struct AmbiguityCounts {
  int noun_homonymous = 0;
  int verb_homonymous = 0;
  int total_homonymous() const { return noun_homonymous + verb_homonymous; }
  int polysemous() const { return 4 - total_homonymous(); }
};

/// Reads the ambiguity labels written by build_bell_model. Throws
/// MissingMetaError.
AmbiguityCounts ambiguity_counts(const nlohmann::json& meta);

template <Scalar T>
AmbiguityCounts ambiguity_counts(const BasicEmpiricalModel<T>& model) {
  return ambiguity_counts(model.meta());
}

}  // namespace caufrac::ling
