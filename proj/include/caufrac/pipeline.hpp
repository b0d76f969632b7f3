#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "caufrac/fraction.hpp"
#include "caufrac/model_io.hpp"
#include "caufrac/parallel.hpp"
#include "caufrac/stats.hpp"

namespace caufrac {

struct RunConfig {
  /// Unset: each model keeps the arithmetic its file implies.
  std::optional<Arithmetic> arithmetic;
  double tolerance = kDefaultTolerance;
  MethodChoice method = MethodChoice::automatic;
  double threshold = 0.7;
  std::size_t bins = 20;
  bool drop_neutral = false;
  std::size_t jobs = default_jobs();
  stats::Sidedness sided = stats::Sidedness::two_sided;

  /// Throws ParseError unless tolerance > 0, threshold in [0, 1], jobs >= 1.
  void check() const;
};

struct ModelInput {
  std::string id;
  AnyModel model;
};

struct OrderFraction {
  std::string order;
  FractionMethod method = FractionMethod::lp;
  std::string gamma_text;  // "13/42" in rational mode
  double gamma = 0;
};

struct ModelFractions {
  std::string id;
  Arithmetic arithmetic = Arithmetic::rational;
  nlohmann::json meta;
  std::vector<OrderFraction> fractions;
  /// Set when the model failed; fractions are then empty.
  std::string error_kind;
  std::string error;
  bool solver_failure = false;
};

/// Converts to the requested arithmetic. Float to rational fails with
/// ArithmeticModeError unless every row sums to exactly 1 in binary.
AnyModel convert(const AnyModel& model, std::optional<Arithmetic> target);

ModelFractions compute_model_fractions(const ModelInput& input, const RunConfig& config);

/// Parallel over models; per-model failures are recorded, not thrown.
/// Output is sorted by id. Throws DuplicateLabelError on repeated ids.
std::vector<ModelFractions> compute_batch(const std::vector<ModelInput>& inputs,
                                          const RunConfig& config);

nlohmann::json fractions_report(const std::vector<ModelFractions>& rows, const RunConfig& config);
std::vector<ModelFractions> parse_fractions_report(const nlohmann::json& doc);

struct Analysis {
  stats::FractionSummary summary;
  std::vector<stats::CorrelationEntry> correlations;
};

/// Summary grouped by the meta phrase_type ("all" when absent), plus the
/// correlation table over the linguistic models.
Analysis analyze(const std::vector<ModelFractions>& rows, const RunConfig& config);

/// Writes summary.json and correlations.json under `out`; returns manifest
/// entries.
nlohmann::json write_analysis(const Analysis& analysis, const std::filesystem::path& out);

struct PipelineInputs {
  std::filesystem::path annotations;
  std::filesystem::path phrases;
  std::filesystem::path specs;
};

struct PipelineResult {
  nlohmann::json manifest;
  std::size_t models = 0;
  std::size_t skipped = 0;
  bool solver_failure = false;
};

/// aggregate -> build -> fractions -> statistics -> plots. Every input is
/// parsed and cross-checked before anything is written. Writes
/// models/<id>.json, fractions.json, summary.json, correlations.json,
/// plots/* and manifest.json under `out`.
PipelineResult run_pipeline(const PipelineInputs& inputs, const std::filesystem::path& out,
                            const RunConfig& config);

}  // namespace caufrac
