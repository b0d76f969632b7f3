#include "caufrac/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "caufrac/csv.hpp"
#include "caufrac/errors.hpp"

namespace caufrac {

using nlohmann::json;

Arithmetic arithmetic_of(const AnyModel& model) {
  return std::holds_alternative<RationalModel>(model) ? Arithmetic::rational
                                                      : Arithmetic::floating;
}

const CausalScenario& scenario_of(const AnyModel& model) {
  return std::visit([](const auto& m) -> const CausalScenario& { return m.scenario(); }, model);
}

const json& meta_of(const AnyModel& model) {
  return std::visit([](const auto& m) -> const json& { return m.meta(); }, model);
}

std::string joint_key(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k) out += ',';
    out += labels[k];
  }
  return out;
}

namespace {

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : key) {
    if (c == ',') {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

void check_label(const std::string& label) {
  if (label.find(',') != std::string::npos) {
    throw ParseError("alphabet label '" + label + "' must not contain ','");
  }
}

std::vector<std::string> string_list(const json& doc, const char* what) {
  if (!doc.is_array()) throw ParseError(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : doc) {
    if (!item.is_string()) throw ParseError(std::string(what) + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<std::string> input_labels(const CausalScenario& s, const Assignment& a) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(s.event(k).inputs[a[k]]);
  return out;
}

std::vector<std::string> output_labels(const CausalScenario& s, const Assignment& a) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(s.event(k).outputs[a[k]]);
  return out;
}

// Parsed entry: exact value or a float.
struct Entry {
  Rational exact;
  double approx = 0;
  bool is_float = false;
};

Entry parse_entry(const json& value, const std::string& where) {
  Entry e;
  if (value.is_string()) {
    try {
      e.exact = parse_rational(value.get<std::string>());
    } catch (const ParseError& err) {
      throw ParseError(where + ": " + err.what());
    }
    e.approx = rational_to_double(e.exact);
  } else if (value.is_number_integer()) {
    e.exact = Rational(value.get<long>());
    e.approx = static_cast<double>(value.get<long>());
  } else if (value.is_number_float()) {
    e.approx = value.get<double>();
    if (!std::isfinite(e.approx)) throw ParseError(where + ": non-finite probability");
    e.is_float = true;
  } else {
    throw ParseError(where + ": probability must be a \"p/q\" string or a number");
  }
  return e;
}

AnyModel assemble(CausalScenario scenario, const std::vector<std::vector<Entry>>& entries,
                  double tolerance, json meta) {
  bool any_float = false;
  for (const auto& row : entries) {
    for (const auto& e : row) any_float = any_float || e.is_float;
  }
  if (any_float) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : entries) {
      auto& out = rows.emplace_back();
      for (const auto& e : row) out.push_back(e.approx);
    }
    return FloatModel::from_table(std::move(scenario), std::move(rows), tolerance, std::move(meta));
  }
  std::vector<std::vector<Rational>> rows;
  for (const auto& row : entries) {
    auto& out = rows.emplace_back();
    for (const auto& e : row) out.push_back(e.exact);
  }
  return RationalModel::from_table(std::move(scenario), std::move(rows), tolerance,
                                   std::move(meta));
}

std::size_t find_label(const std::vector<std::string>& labels, const std::string& label,
                       const std::string& where) {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return k;
  }
  throw ShapeError(where + ": unknown label '" + label + "'");
}

Assignment parse_joint(const std::string& key, const CausalScenario& s, bool inputs,
                       const std::string& where) {
  const auto parts = split_key(key);
  if (parts.size() != s.num_events()) {
    throw ShapeError(where + ": key '" + key + "' must have one label per event");
  }
  Assignment a(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& alphabet = inputs ? s.event(k).inputs : s.event(k).outputs;
    a[k] = find_label(alphabet, parts[k], where);
  }
  return a;
}

}  // namespace

json scenario_to_json(const CausalScenario& scenario) {
  json events = json::array();
  for (const auto& ev : scenario.events()) {
    events.push_back({{"id", ev.id}, {"inputs", ev.inputs}, {"outputs", ev.outputs}});
  }
  json order = json::array();
  for (const auto& [a, b] : scenario.order()) order.push_back(json::array({a, b}));
  return {{"events", std::move(events)}, {"order", std::move(order)}};
}

CausalScenario scenario_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("events")) {
    throw ParseError("scenario must be an object with an \"events\" array");
  }
  const json& events_doc = doc.at("events");
  if (!events_doc.is_array()) throw ParseError("\"events\" must be an array");
  std::vector<Event> events;
  for (const auto& ev : events_doc) {
    if (!ev.is_object() || !ev.contains("id") || !ev.at("id").is_string()) {
      throw ParseError("every event needs a string \"id\"");
    }
    Event e;
    e.id = ev.at("id").get<std::string>();
    e.inputs = string_list(ev.value("inputs", json::array()), "inputs");
    e.outputs = string_list(ev.value("outputs", json::array()), "outputs");
    for (const auto& l : e.inputs) check_label(l);
    for (const auto& l : e.outputs) check_label(l);
    events.push_back(std::move(e));
  }
  OrderRelation order;
  if (doc.contains("order")) {
    const json& order_doc = doc.at("order");
    if (!order_doc.is_array()) throw ParseError("\"order\" must be an array of pairs");
    for (const auto& pair : order_doc) {
      const auto items = string_list(pair, "order pair");
      if (items.size() != 2) throw ParseError("order entries must be [before, after] pairs");
      order.emplace_back(items[0], items[1]);
    }
  }
  return CausalScenario::validate(std::move(events), std::move(order));
}

template <Scalar T>
json model_to_json(const BasicEmpiricalModel<T>& model, const std::string& id) {
  const auto& s = model.scenario();
  const JointIndexer in = s.input_indexer();
  const JointIndexer out = s.output_indexer();
  json rows = json::object();
  for (std::size_t i = 0; i < in.size(); ++i) {
    json row = json::object();
    for (std::size_t o = 0; o < out.size(); ++o) {
      const std::string key = joint_key(output_labels(s, out.decode(o)));
      if constexpr (NumTraits<T>::exact) {
        row[key] = format_rational(model.at(i, o));
      } else {
        row[key] = model.at(i, o);
      }
    }
    rows[joint_key(input_labels(s, in.decode(i)))] = std::move(row);
  }
  json doc = {{"scenario", scenario_to_json(s)}, {"rows", std::move(rows)}};
  if (!model.meta().is_null()) doc["meta"] = model.meta();
  if (!id.empty()) doc["id"] = id;
  return doc;
}

template json model_to_json(const RationalModel&, const std::string&);
template json model_to_json(const FloatModel&, const std::string&);

AnyModel model_from_json(const json& doc, double tolerance) {
  if (!doc.is_object()) throw ParseError("model must be a JSON object");
  CausalScenario scenario =
      scenario_from_json(doc.contains("scenario") ? doc.at("scenario") : doc);
  if (!doc.contains("rows") || !doc.at("rows").is_object()) {
    throw ParseError("model needs a \"rows\" object");
  }
  const JointIndexer in = scenario.input_indexer();
  const JointIndexer out = scenario.output_indexer();
  std::vector<std::vector<Entry>> entries(in.size(), std::vector<Entry>(out.size()));
  std::vector<bool> seen(in.size(), false);
  for (const auto& [in_key, row] : doc.at("rows").items()) {
    const std::string where = "row '" + in_key + "'";
    const std::size_t i = in.encode(parse_joint(in_key, scenario, true, where));
    if (seen[i]) throw ShapeError(where + ": duplicate row");
    seen[i] = true;
    if (!row.is_object()) throw ParseError(where + ": row must be an object");
    for (const auto& [out_key, value] : row.items()) {
      const std::size_t o = out.encode(parse_joint(out_key, scenario, false, where));
      entries[i][o] = parse_entry(value, where + " output '" + out_key + "'");
    }
  }
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!seen[i]) {
      throw ShapeError("missing row '" + joint_key(input_labels(scenario, in.decode(i))) + "'");
    }
  }
  return assemble(std::move(scenario), entries, tolerance,
                  doc.contains("meta") ? doc.at("meta") : json());
}

AnyModel model_from_csv(std::istream& stream, const CausalScenario* scenario, double tolerance) {
  const csv::Table table = csv::read(stream);
  if (table.header.size() < 2) throw ParseError("model CSV needs at least one output column");
  std::vector<std::vector<std::string>> out_keys;
  for (std::size_t c = 1; c < table.header.size(); ++c) out_keys.push_back(split_key(table.header[c]));
  std::vector<std::vector<std::string>> in_keys;
  for (const auto& row : table.rows) in_keys.push_back(split_key(row.fields[0]));

  CausalScenario s;
  if (scenario) {
    s = *scenario;
  } else {
    const std::size_t arity = out_keys.front().size();
    std::vector<Event> events(arity);
    auto add = [](std::vector<std::string>& alphabet, const std::string& label) {
      for (const auto& l : alphabet) {
        if (l == label) return;
      }
      alphabet.push_back(label);
    };
    for (std::size_t k = 0; k < arity; ++k) {
      events[k].id = std::string(1, static_cast<char>('A' + k % 26)) +
                     (k >= 26 ? std::to_string(k / 26) : std::string());
    }
    for (const auto& key : out_keys) {
      if (key.size() != arity) throw ShapeError("output header keys differ in arity");
      for (std::size_t k = 0; k < arity; ++k) add(events[k].outputs, key[k]);
    }
    for (const auto& key : in_keys) {
      if (key.size() != arity) throw ShapeError("input row keys must have one label per event");
      for (std::size_t k = 0; k < arity; ++k) add(events[k].inputs, key[k]);
    }
    s = CausalScenario::validate(std::move(events), {});
  }

  const JointIndexer in = s.input_indexer();
  const JointIndexer out = s.output_indexer();
  std::vector<std::size_t> column_to_output;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    column_to_output.push_back(
        out.encode(parse_joint(table.header[c], s, false, "header column " + std::to_string(c))));
  }
  std::vector<std::vector<Entry>> entries(in.size(), std::vector<Entry>(out.size()));
  std::vector<bool> seen(in.size(), false);
  for (const auto& row : table.rows) {
    const std::string where = "line " + std::to_string(row.line);
    const std::size_t i = in.encode(parse_joint(row.fields[0], s, true, where));
    if (seen[i]) throw ShapeError(where + ": duplicate row");
    seen[i] = true;
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      const std::string& text = row.fields[c];
      Entry e;
      if (text.find_first_of(".eE") != std::string::npos) {
        try {
          e.approx = std::stod(text);
        } catch (const std::exception&) {
          throw ParseError(where + ": bad number '" + text + "'");
        }
        e.is_float = true;
      } else {
        try {
          e.exact = parse_rational(text);
        } catch (const ParseError& err) {
          throw ParseError(where + ": " + err.what());
        }
        e.approx = rational_to_double(e.exact);
      }
      entries[i][column_to_output[c - 1]] = e;
    }
  }
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!seen[i]) throw ShapeError("model CSV is missing a row for every joint input");
  }
  return assemble(std::move(s), entries, tolerance, json());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

AnyModel read_model_file(const std::filesystem::path& path, double tolerance) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return model_from_csv(in, nullptr, tolerance);
  }
  return model_from_json(read_json_file(path), tolerance);
}

std::string model_id(const json& doc, const std::filesystem::path& path) {
  if (doc.is_object()) {
    if (doc.contains("id") && doc.at("id").is_string()) return doc.at("id").get<std::string>();
    if (doc.contains("meta") && doc.at("meta").is_object() && doc.at("meta").contains("model_id") &&
        doc.at("meta").at("model_id").is_string()) {
      return doc.at("meta").at("model_id").get<std::string>();
    }
  }
  return path.stem().string();
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOWriteError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IOWriteError("write failed for '" + path.string() + "'");
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, dump_json(doc));
}

}  // namespace caufrac
