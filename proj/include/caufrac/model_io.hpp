#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "caufrac/empirical_model.hpp"
#include "json.hpp"

namespace caufrac {

/// A model in whichever arithmetic its source file implied.
using AnyModel = std::variant<RationalModel, FloatModel>;

Arithmetic arithmetic_of(const AnyModel& model);
const CausalScenario& scenario_of(const AnyModel& model);
const nlohmann::json& meta_of(const AnyModel& model);

/// {"events":[{"id":..,"inputs":[..],"outputs":[..]}],"order":[["A","B"]]}
nlohmann::json scenario_to_json(const CausalScenario& scenario);
CausalScenario scenario_from_json(const nlohmann::json& doc);

/// {"scenario":{..},"rows":{"<i_A>,<i_B>":{"<o_A>,<o_B>":"p/q"|number}},"meta":{..}}
/// Rational models serialize entries as "p/q" strings, float models as numbers.
template <Scalar T>
nlohmann::json model_to_json(const BasicEmpiricalModel<T>& model, const std::string& id = {});

/// String entries are exact rationals; any non-integer number switches the
/// whole model to float mode. Missing output keys count as 0; every joint
/// input must be present.
AnyModel model_from_json(const nlohmann::json& doc, double tolerance = kDefaultTolerance);

/// Header `input,<output key>...`, one row per joint input key, e.g.
///   input,"0,0","0,1","1,0","1,1"
///   "0,0",0,6/13,0,7/13
/// Without a scenario, events are named A, B, ... with alphabets in order
/// of first appearance and no causal relations.
AnyModel model_from_csv(std::istream& in, const CausalScenario* scenario = nullptr,
                        double tolerance = kDefaultTolerance);

/// Dispatches on extension (.json or .csv). Throws ParseError on unreadable
/// input.
AnyModel read_model_file(const std::filesystem::path& path, double tolerance = kDefaultTolerance);

/// Model id: top-level "id", else meta "model_id", else the file stem.
std::string model_id(const nlohmann::json& doc, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline. Throws IOWriteError.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string dump_json(const nlohmann::json& doc);

/// "lab1,lab2" for a joint assignment.
std::string joint_key(const std::vector<std::string>& labels);

}  // namespace caufrac
