// caufrac: causal fractions of empirical models and the phrase-ambiguity pipeline.
//
//   caufrac validate FILE...
//   caufrac fractions MODEL... [--out DIR]
//   caufrac pipeline ANNOTATIONS PHRASES SPECS --out DIR
//   caufrac report FRACTIONS_JSON [--out DIR]
//   caufrac plot FRACTIONS_JSON --out DIR
//
// Exit status: 0 success, 1 input error, 2 internal or solver error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "caufrac/csv.hpp"
#include "caufrac/errors.hpp"
#include "caufrac/linguistics.hpp"
#include "caufrac/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace caufrac;

namespace {

struct Flags {
  std::string arithmetic;
  double tolerance = kDefaultTolerance;
  std::string method = "auto";
  double threshold = 0.7;
  bool drop_neutral = false;
  std::size_t jobs = default_jobs();
  bool one_sided = false;
  std::string out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--arithmetic", f.arithmetic, "rational or float")
      ->check(CLI::IsMember({"rational", "float"}));
  cmd->add_option("--tolerance", f.tolerance, "float comparison tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--method", f.method, "auto, closed, lp or bound")
      ->check(CLI::IsMember({"auto", "closed", "lp", "bound"}));
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_analysis(CLI::App* cmd, Flags& f) {
  cmd->add_option("--threshold", f.threshold, "share-above threshold")->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--one-sided", f.one_sided, "one-sided p-values in the observed direction");
}

RunConfig make_config(const Flags& f) {
  RunConfig c;
  if (f.arithmetic == "rational") c.arithmetic = Arithmetic::rational;
  if (f.arithmetic == "float") c.arithmetic = Arithmetic::floating;
  c.tolerance = f.tolerance;
  c.method = parse_method_choice(f.method);
  c.threshold = f.threshold;
  c.drop_neutral = f.drop_neutral;
  c.jobs = f.jobs;
  c.sided = f.one_sided ? stats::Sidedness::one_sided : stats::Sidedness::two_sided;
  c.check();
  return c;
}

void diagnostic(const std::string& file, const Error& e) {
  json d = {{"severity", "error"}, {"kind", e.kind()}, {"message", e.what()}};
  if (!file.empty()) d["file"] = file;
  std::cerr << d.dump() << std::endl;
}

int exit_code(const Error& e) { return e.is_input_error() ? 1 : 2; }

std::vector<std::string> csv_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return csv::split_line(line);
  }
  throw ParseError("empty CSV input (no header)");
}

bool has(const std::vector<std::string>& header, const std::string& name) {
  return std::find(header.begin(), header.end(), name) != header.end();
}

template <class Reader>
auto read_csv(const fs::path& path, Reader&& reader) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return reader(in);
}

int cmd_validate(const std::vector<std::string>& paths, const Flags& flags) {
  ling::PhraseIndex phrases;
  bool have_phrases = false;
  std::vector<std::pair<std::string, std::vector<ling::BellModelSpec>>> specs;
  std::vector<std::pair<std::string, std::vector<ling::AnnotationRecord>>> annotations;

  auto ok = [](const std::string& file, const std::string& type) {
    std::cout << json({{"file", file}, {"status", "ok"}, {"type", type}}).dump() << "\n";
  };
  for (const auto& file : paths) {
    const fs::path path(file);
    try {
      if (path.extension() == ".csv") {
        const auto header = csv_header(path);
        if (has(header, "worker_id")) {
          annotations.emplace_back(file, read_csv(path, ling::read_annotations));
          ok(file, "annotations");
        } else if (has(header, "cell_00")) {
          specs.emplace_back(file, read_csv(path, ling::read_specs));
          ok(file, "specs");
        } else if (has(header, "noun")) {
          for (auto& p : read_csv(path, ling::read_phrases)) {
            const std::string id = p.phrase_id;
            if (!phrases.emplace(id, std::move(p)).second) {
              throw DuplicateLabelError("duplicate phrase_id '" + id + "'");
            }
          }
          have_phrases = true;
          ok(file, "phrases");
        } else {
          read_model_file(path, flags.tolerance);
          ok(file, "model");
        }
      } else {
        const json doc = read_json_file(path);
        if (doc.is_object() && doc.contains("rows")) {
          model_from_json(doc, flags.tolerance);
          ok(file, "model");
        } else if (doc.is_object() && doc.contains("models")) {
          parse_fractions_report(doc);
          ok(file, "fractions_report");
        } else if (doc.is_object() && doc.contains("events")) {
          scenario_from_json(doc);
          ok(file, "scenario");
        } else {
          throw ParseError("not a model, scenario or fractions report");
        }
      }
    } catch (const Error& e) {
      diagnostic(file, e);
      return exit_code(e);
    }
  }
  if (have_phrases) {
    for (const auto& [file, list] : specs) {
      try {
        for (const auto& s : list) {
          try {
            ling::check_spec(s, phrases);
          } catch (const UnresolvedPhraseError& e) {
            throw UnresolvedPhraseError("line " + std::to_string(s.line) + ": " + e.what());
          }
        }
      } catch (const Error& e) {
        diagnostic(file, e);
        return exit_code(e);
      }
    }
    for (const auto& [file, list] : annotations) {
      for (const auto& r : list) {
        if (!phrases.count(r.phrase_id)) {
          const UnresolvedPhraseError e("line " + std::to_string(r.line) + ": unknown phrase_id '" +
                                        r.phrase_id + "'");
          diagnostic(file, e);
          return exit_code(e);
        }
      }
    }
  }
  return 0;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || ext == ".csv")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(p);
    }
  }
  return out;
}

int cmd_fractions(const std::vector<std::string>& paths, const Flags& flags) {
  const RunConfig config = make_config(flags);
  std::vector<ModelInput> inputs;
  for (const auto& path : expand_inputs(paths)) {
    try {
      if (path.extension() == ".csv") {
        inputs.push_back({path.stem().string(), read_model_file(path, config.tolerance)});
      } else {
        const json doc = read_json_file(path);
        inputs.push_back({model_id(doc, path), model_from_json(doc, config.tolerance)});
      }
    } catch (const Error& e) {
      diagnostic(path.string(), e);
      return exit_code(e);
    }
  }
  const auto rows = compute_batch(inputs, config);
  const json report = fractions_report(rows, config);
  if (flags.out.empty()) {
    std::cout << dump_json(report);
  } else {
    write_json_file(fs::path(flags.out) / "fractions.json", report);
  }
  int code = 0;
  for (const auto& r : rows) {
    if (r.error_kind.empty()) continue;
    spdlog::error("model {}: {}: {}", r.id, r.error_kind, r.error);
    code = std::max(code, r.solver_failure ? 2 : 1);
  }
  return code;
}

int cmd_pipeline(const std::vector<std::string>& files, const Flags& flags) {
  RunConfig config = make_config(flags);
  const PipelineResult result =
      run_pipeline({files.at(0), files.at(1), files.at(2)}, flags.out, config);
  spdlog::info("{} models written, {} skipped", result.models, result.skipped);
  std::cout << json({{"models", result.models}, {"skipped", result.skipped}, {"out", flags.out}})
                   .dump()
            << "\n";
  return result.solver_failure ? 2 : 0;
}

std::vector<ModelFractions> load_report(const std::string& path) {
  return parse_fractions_report(read_json_file(path));
}

int cmd_report(const std::string& path, const Flags& flags) {
  const RunConfig config = make_config(flags);
  const Analysis analysis = analyze(load_report(path), config);
  if (flags.out.empty()) {
    std::cout << dump_json({{"summary", stats::to_json(analysis.summary)},
                            {"correlations", stats::to_json(analysis.correlations)}});
  } else {
    write_analysis(analysis, flags.out);
  }
  return 0;
}

int cmd_plot(const std::string& path, const Flags& flags) {
  const RunConfig config = make_config(flags);
  const Analysis analysis = analyze(load_report(path), config);
  const fs::path out(flags.out);
  const json files = stats::emit_plots(analysis.summary, analysis.correlations, out / "plots", out);
  write_json_file(out / "manifest.json", {{"files", files}});
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("caufrac");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CAUFRAC_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Causal fractions of empirical models"};
  app.require_subcommand(1);
  Flags flags;

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "schema-check model, scenario and dataset files");
  validate->add_option("files", validate_paths)->required();
  validate->add_option("--tolerance", flags.tolerance)->check(CLI::PositiveNumber);

  std::vector<std::string> model_paths;
  auto* fractions = app.add_subcommand("fractions", "causal fractions for every model file");
  fractions->add_option("models", model_paths, "model files or directories")->required();
  add_common(fractions, flags);
  fractions->add_option("--out", flags.out, "directory for fractions.json (default: stdout)");

  std::vector<std::string> pipeline_files;
  auto* pipeline = app.add_subcommand("pipeline", "annotations to models, fractions and report");
  pipeline->add_option("inputs", pipeline_files, "ANNOTATIONS PHRASES SPECS")->required()->expected(3);
  add_common(pipeline, flags);
  add_analysis(pipeline, flags);
  pipeline->add_flag("--drop-neutral", flags.drop_neutral, "ignore neutral-grade scores");
  pipeline->add_option("--out", flags.out, "output directory")->required();

  std::string report_path;
  auto* report = app.add_subcommand("report", "summary and correlations from fractions.json");
  report->add_option("fractions", report_path)->required();
  add_analysis(report, flags);
  report->add_option("--out", flags.out, "output directory (default: stdout)");

  std::string plot_path;
  auto* plot = app.add_subcommand("plot", "histogram and scatter plots from fractions.json");
  plot->add_option("fractions", plot_path)->required();
  add_analysis(plot, flags);
  plot->add_option("--out", flags.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_paths, flags);
    if (*fractions) return cmd_fractions(model_paths, flags);
    if (*pipeline) return cmd_pipeline(pipeline_files, flags);
    if (*report) return cmd_report(report_path, flags);
    if (*plot) return cmd_plot(plot_path, flags);
  } catch (const Error& e) {
    diagnostic("", e);
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << json({{"severity", "error"}, {"kind", "InternalError"}, {"message", e.what()}}).dump()
              << std::endl;
    return 2;
  }
  return 0;
}
