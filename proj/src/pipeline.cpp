#include "caufrac/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "caufrac/errors.hpp"
#include "caufrac/linguistics.hpp"

namespace caufrac {

using nlohmann::json;

void RunConfig::check() const {
  if (!(tolerance > 0)) throw ParseError("tolerance must be > 0");
  if (!(threshold >= 0 && threshold <= 1)) throw ParseError("threshold must lie in [0, 1]");
  if (jobs < 1) throw ParseError("jobs must be >= 1");
  if (bins < 1) throw ParseError("bins must be >= 1");
}

AnyModel convert(const AnyModel& model, std::optional<Arithmetic> target) {
  if (!target || *target == arithmetic_of(model)) return model;
  if (*target == Arithmetic::floating) return to_float(std::get<RationalModel>(model));
  try {
    return to_rational(std::get<FloatModel>(model));
  } catch (const NormalizationError& e) {
    throw ArithmeticModeError(std::string("float model cannot be read exactly (") + e.what() +
                              "); use float arithmetic");
  }
}

namespace {

template <Scalar T>
std::vector<OrderFraction> fractions_of(const BasicEmpiricalModel<T>& model,
                                        const RunConfig& config) {
  FractionOptions options;
  options.tolerance = config.tolerance;
  std::vector<OrderFraction> out;
  for (const auto& r : full_report(model, config.method, options)) {
    OrderFraction f;
    f.order = r.order.label();
    f.method = r.method;
    if constexpr (NumTraits<T>::exact) {
      f.gamma_text = format_rational(r.gamma);
      f.gamma = rational_to_double(r.gamma);
    } else {
      f.gamma_text = stats::format_double(r.gamma);
      f.gamma = r.gamma;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

ModelFractions compute_model_fractions(const ModelInput& input, const RunConfig& config) {
  ModelFractions row;
  row.id = input.id;
  row.meta = meta_of(input.model);
  try {
    const AnyModel model = convert(input.model, config.arithmetic);
    row.arithmetic = arithmetic_of(model);
    row.fractions = std::visit([&](const auto& m) { return fractions_of(m, config); }, model);
  } catch (const Error& e) {
    row.arithmetic = config.arithmetic.value_or(arithmetic_of(input.model));
    row.fractions.clear();
    row.error_kind = e.kind();
    row.error = e.what();
    row.solver_failure = !e.is_input_error();
  }
  return row;
}

std::vector<ModelFractions> compute_batch(const std::vector<ModelInput>& inputs,
                                          const RunConfig& config) {
  std::set<std::string> ids;
  for (const auto& in : inputs) {
    if (!ids.insert(in.id).second) throw DuplicateLabelError("duplicate model id '" + in.id + "'");
  }
  std::vector<ModelFractions> rows(inputs.size());
  parallel_for(inputs.size(), config.jobs,
               [&](std::size_t i) { rows[i] = compute_model_fractions(inputs[i], config); });
  std::sort(rows.begin(), rows.end(),
            [](const ModelFractions& a, const ModelFractions& b) { return a.id < b.id; });
  return rows;
}

json fractions_report(const std::vector<ModelFractions>& rows, const RunConfig& config) {
  json models = json::array();
  for (const auto& r : rows) {
    json item = {{"id", r.id}, {"arithmetic", arithmetic_name(r.arithmetic)}};
    if (!r.meta.is_null()) item["meta"] = r.meta;
    if (!r.error_kind.empty()) {
      item["error"] = {{"kind", r.error_kind}, {"message", r.error}};
    } else {
      json fractions = json::array();
      for (const auto& f : r.fractions) {
        json g = r.arithmetic == Arithmetic::rational ? json(f.gamma_text) : json(f.gamma);
        fractions.push_back({{"order", f.order},
                             {"gamma", std::move(g)},
                             {"gamma_float", f.gamma},
                             {"method", method_name(f.method)}});
      }
      item["fractions"] = std::move(fractions);
    }
    models.push_back(std::move(item));
  }
  return {{"method", method_choice_name(config.method)},
          {"tolerance", config.tolerance},
          {"models", std::move(models)}};
}

std::vector<ModelFractions> parse_fractions_report(const json& doc) {
  if (!doc.is_object() || !doc.contains("models") || !doc.at("models").is_array()) {
    throw ParseError("fractions report needs a \"models\" array");
  }
  std::vector<ModelFractions> rows;
  for (const auto& item : doc.at("models")) {
    if (!item.is_object() || !item.contains("id") || !item.at("id").is_string()) {
      throw ParseError("every report entry needs a string \"id\"");
    }
    ModelFractions r;
    r.id = item.at("id").get<std::string>();
    r.arithmetic = item.value("arithmetic", "rational") == "float" ? Arithmetic::floating
                                                                   : Arithmetic::rational;
    if (item.contains("meta")) r.meta = item.at("meta");
    if (item.contains("error")) {
      r.error_kind = item.at("error").value("kind", "Error");
      r.error = item.at("error").value("message", "");
    }
    for (const auto& f : item.value("fractions", json::array())) {
      if (!f.is_object() || !f.contains("order") || !f.contains("gamma_float") ||
          !f.at("gamma_float").is_number()) {
        throw ParseError("report entry '" + r.id + "' has a malformed fraction");
      }
      OrderFraction o;
      o.order = f.at("order").get<std::string>();
      o.gamma = f.at("gamma_float").get<double>();
      const json& g = f.value("gamma", json());
      o.gamma_text = g.is_string() ? g.get<std::string>() : stats::format_double(o.gamma);
      r.fractions.push_back(std::move(o));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

Analysis analyze(const std::vector<ModelFractions>& rows, const RunConfig& config) {
  std::vector<stats::FractionSample> samples;
  std::vector<stats::LabeledModel> labeled;
  for (const auto& r : rows) {
    if (!r.error_kind.empty()) continue;
    std::string group = "all";
    if (r.meta.is_object() && r.meta.contains("phrase_type") && r.meta.at("phrase_type").is_string()) {
      group = r.meta.at("phrase_type").get<std::string>();
    }
    stats::LabeledModel m;
    m.model_id = r.id;
    m.phrase_type = group;
    for (const auto& f : r.fractions) {
      samples.push_back({r.id, group, f.order, f.gamma});
      m.fractions.emplace_back(f.order, f.gamma);
    }
    if (group == "subject_verb" || group == "verb_object") {
      const ling::AmbiguityCounts counts = ling::ambiguity_counts(r.meta);
      m.noun_homonymous = counts.noun_homonymous;
      m.verb_homonymous = counts.verb_homonymous;
      labeled.push_back(std::move(m));
    }
  }
  Analysis a;
  a.summary = stats::summarize_fractions(samples, {config.bins, config.threshold});
  a.correlations = stats::correlation_table(labeled, config.sided);
  return a;
}

json write_analysis(const Analysis& analysis, const std::filesystem::path& out) {
  write_json_file(out / "summary.json", stats::to_json(analysis.summary));
  write_json_file(out / "correlations.json", stats::to_json(analysis.correlations));
  return json::array({{{"path", "summary.json"}, {"kind", "summary"}, {"format", "json"}},
                      {{"path", "correlations.json"}, {"kind", "correlations"}, {"format", "json"}}});
}

namespace {

template <class Fn>
auto read_csv_file(const std::filesystem::path& path, Fn&& reader) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return reader(in);
  } catch (const Error& e) {
    // Prefix the file for diagnostics, keeping the error kind.
    struct Located : Error {
      Located(const Error& e, const std::string& msg) : Error(e.kind(), msg) {}
    };
    throw Located(e, path.filename().string() + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineInputs& inputs, const std::filesystem::path& out,
                            const RunConfig& config) {
  config.check();
  const auto records = read_csv_file(inputs.annotations, ling::read_annotations);
  if (records.empty()) throw ParseError("annotations file has no records");
  const auto phrases = ling::index_phrases(read_csv_file(inputs.phrases, ling::read_phrases));
  const auto specs = read_csv_file(inputs.specs, ling::read_specs);
  for (const auto& spec : specs) ling::check_spec(spec, phrases);
  std::set<std::string> unknown;
  for (const auto& r : records) {
    if (!phrases.count(r.phrase_id) && unknown.insert(r.phrase_id).second) {
      spdlog::warn("annotations mention unknown phrase '{}'", r.phrase_id);
    }
  }

  const auto aggregated = ling::aggregate_all(records, {config.drop_neutral}, config.jobs);
  for (const auto& [id, why] : aggregated.failures) spdlog::warn("phrase {}: {}", id, why);

  json skipped = json::array();
  std::vector<ModelInput> models;
  std::vector<std::pair<std::string, RationalModel>> exact;
  for (const auto& spec : specs) {
    std::string reason;
    for (const auto& cell : spec.cells) {
      auto fail = aggregated.failures.find(cell);
      if (fail != aggregated.failures.end()) {
        reason = fail->second;
        break;
      }
      if (!aggregated.distributions.count(cell)) {
        reason = "MissingCombinationError: phrase '" + cell + "' has no annotations";
        break;
      }
    }
    if (!reason.empty()) {
      spdlog::warn("skipping model {}: {}", spec.model_id, reason);
      skipped.push_back({{"model_id", spec.model_id}, {"reason", reason}});
      continue;
    }
    RationalModel model = ling::build_bell_model(spec, phrases, aggregated.distributions);
    exact.emplace_back(spec.model_id, model);
    models.push_back({spec.model_id, std::move(model)});
  }

  RunConfig run = config;
  if (!run.arithmetic) run.arithmetic = Arithmetic::floating;
  const auto rows = compute_batch(models, run);
  const Analysis analysis = analyze(rows, run);

  json files = json::array();
  std::sort(exact.begin(), exact.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, model] : exact) {
    const std::string rel = "models/" + stats::file_token(id) + ".json";
    write_json_file(out / rel, model_to_json(model, id));
    files.push_back({{"path", rel}, {"kind", "model"}, {"format", "json"}, {"model_id", id}});
  }
  write_json_file(out / "fractions.json", fractions_report(rows, run));
  files.push_back({{"path", "fractions.json"}, {"kind", "fractions"}, {"format", "json"}});
  for (auto& f : write_analysis(analysis, out)) files.push_back(std::move(f));
  for (auto& f : stats::emit_plots(analysis.summary, analysis.correlations, out / "plots", out)) {
    files.push_back(std::move(f));
  }

  PipelineResult result;
  result.models = models.size();
  result.skipped = skipped.size();
  json failures = json::array();
  for (const auto& r : rows) {
    if (r.error_kind.empty()) continue;
    failures.push_back({{"model_id", r.id}, {"kind", r.error_kind}, {"message", r.error}});
    result.solver_failure = result.solver_failure || r.solver_failure;
  }
  json phrase_failures = json::object();
  for (const auto& [id, why] : aggregated.failures) phrase_failures[id] = why;

  result.manifest = {
      {"inputs",
       {{"annotations", inputs.annotations.filename().string()},
        {"phrases", inputs.phrases.filename().string()},
        {"specs", inputs.specs.filename().string()}}},
      {"config",
       {{"arithmetic", arithmetic_name(*run.arithmetic)},
        {"method", method_choice_name(run.method)},
        {"tolerance", run.tolerance},
        {"threshold", run.threshold},
        {"bins", run.bins},
        {"drop_neutral", run.drop_neutral},
        {"sidedness", stats::sidedness_name(run.sided)}}},
      {"counts",
       {{"annotations", records.size()},
        {"phrases", phrases.size()},
        {"specs", specs.size()},
        {"models", result.models},
        {"skipped", result.skipped}}},
      {"skipped", std::move(skipped)},
      {"phrase_failures", std::move(phrase_failures)},
      {"model_failures", std::move(failures)},
      {"files", std::move(files)},
  };
  write_json_file(out / "manifest.json", result.manifest);
  return result;
}

}  // namespace caufrac
