#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace caufrac::stats {

enum class PValueMethod { t_approximation, exact_permutation };
enum class Sidedness { two_sided, one_sided };

std::string p_value_method_name(PValueMethod method);
std::string sidedness_name(Sidedness sided);

inline constexpr std::size_t kExactPermutationMax = 9;

struct CorrelationResult {
  double rho = 0;
  double p_value = 1;
  std::size_t n = 0;
  PValueMethod method = PValueMethod::t_approximation;
  /// One-sided p-values test in the direction of the observed sign.
  Sidedness sided = Sidedness::two_sided;
};

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> mid_ranks(const std::vector<double>& values);

/// Pearson correlation of mid-ranks. Exact permutation p-value for n <= 9,
/// Student t approximation with n - 2 degrees of freedom above that.
/// Throws ShapeError (length mismatch or n < 3) and ConstantInputError.
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                           Sidedness sided = Sidedness::two_sided);

/// One fraction of one model under one order.
struct FractionSample {
  std::string model_id;
  std::string group;  // phrase type, or "all"
  std::string order;  // "S->V", "NS", ...
  double gamma = 0;
};

struct SummaryOptions {
  std::size_t bins = 20;
  double threshold = 0.7;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 values on [0, 1]
  std::vector<std::size_t> counts;
};

/// Bins are [lo, hi) except the last, which is [lo, 1].
Histogram histogram(const std::vector<double>& values, std::size_t bins);

double median(std::vector<double> values);

struct OrderSummary {
  std::string group;
  std::string order;
  std::size_t n = 0;
  Histogram hist;
  double median = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
  /// Share of models with gamma strictly above the threshold.
  double share_above = 0;
};

struct FractionSummary {
  SummaryOptions options;
  /// Sorted by (group, order).
  std::vector<OrderSummary> orders;
};

FractionSummary summarize_fractions(const std::vector<FractionSample>& samples,
                                    const SummaryOptions& options = {});

nlohmann::json to_json(const FractionSummary& summary);

/// Fractions and ambiguity counts of one model, as the correlation input.
struct LabeledModel {
  std::string model_id;
  std::string phrase_type;
  std::vector<std::pair<std::string, double>> fractions;  // order label -> gamma
  std::optional<int> noun_homonymous;
  std::optional<int> verb_homonymous;
};

struct CorrelationEntry {
  std::string name;         // e.g. "SV_vs_homonymous_total"
  std::string phrase_type;  // subject_verb | verb_object
  std::string order;        // S->V for subject-verb, O->V for verb-object
  std::string predictor;    // homonymous_total | homonymous_verb | homonymous_noun
  std::vector<std::string> model_ids;
  std::vector<double> x;  // homonymous counts
  std::vector<double> y;  // fractions
  /// Against the homonymous count; the polysemous count is its negation
  /// (4 - total, or 2 - per role), so its rho is -rho with the same p-value.
  std::optional<CorrelationResult> vs_homonymous;
  std::optional<CorrelationResult> vs_polysemous;
  std::string note;  // why the correlation was skipped
};

/// The six correlations: SV (S->V) and VO (O->V) fractions against the total,
/// verb and noun homonymous counts. Throws MissingMetaError when a model of
/// the relevant type lacks counts or the order's fraction.
std::vector<CorrelationEntry> correlation_table(const std::vector<LabeledModel>& models,
                                                Sidedness sided = Sidedness::two_sided);

nlohmann::json to_json(const CorrelationResult& result);
nlohmann::json to_json(const std::vector<CorrelationEntry>& table);

/// Writes CSV and SVG files under `dir`: one histogram per summarized order
/// (shared axes) and one scatter per correlation entry with data. Returns
/// manifest entries with paths relative to `base`. Throws IOWriteError.
nlohmann::json emit_plots(const FractionSummary& summary,
                          const std::vector<CorrelationEntry>& correlations,
                          const std::filesystem::path& dir,
                          const std::filesystem::path& base);

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// "S->V" -> "S_to_V"; other characters outside [A-Za-z0-9_-] become '_'.
std::string file_token(const std::string& text);

}  // namespace caufrac::stats
