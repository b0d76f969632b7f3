#include "caufrac/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "caufrac/errors.hpp"
#include "caufrac/csv.hpp"
#include "caufrac/model_io.hpp"

namespace caufrac::stats {

using nlohmann::json;

std::string p_value_method_name(PValueMethod method) {
  return method == PValueMethod::exact_permutation ? "exact_permutation" : "t_approximation";
}

std::string sidedness_name(Sidedness sided) {
  return sided == Sidedness::two_sided ? "two_sided" : "one_sided";
}

std::string format_double(double value) {
  if (value == 0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, end);
}

std::string file_token(const std::string& text) {
  std::string out;
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (text.compare(k, 2, "->") == 0) {
      out += "_to_";
      ++k;
      continue;
    }
    const char c = text[k];
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out;
}

std::vector<double> mid_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t lo = 0; lo < idx.size();) {
    std::size_t hi = lo + 1;
    while (hi < idx.size() && values[idx[hi]] == values[idx[lo]]) ++hi;
    const double r = (static_cast<double>(lo + 1) + static_cast<double>(hi)) / 2.0;
    for (std::size_t k = lo; k < hi; ++k) ranks[idx[k]] = r;
    lo = hi;
  }
  return ranks;
}

namespace {

std::vector<double> centered(std::vector<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                           Sidedness sided) {
  if (x.size() != y.size()) throw ShapeError("spearman needs lists of equal length");
  const std::size_t n = x.size();
  if (n < 3) throw ShapeError("spearman needs at least 3 pairs");
  const std::vector<double> rx = centered(mid_ranks(x));
  const std::vector<double> ry = centered(mid_ranks(y));
  const double sxx = dot(rx, rx);
  const double syy = dot(ry, ry);
  if (sxx <= 0 || syy <= 0) throw ConstantInputError("spearman input has zero rank variance");
  const double norm = std::sqrt(sxx * syy);
  const double rho = std::clamp(dot(rx, ry) / norm, -1.0, 1.0);

  CorrelationResult result;
  result.rho = rho;
  result.n = n;
  result.sided = sided;
  if (n <= kExactPermutationMax) {
    result.method = PValueMethod::exact_permutation;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double eps = 1e-12;
    std::size_t hits = 0;
    std::size_t total = 0;
    std::vector<double> shuffled(n);
    do {
      for (std::size_t k = 0; k < n; ++k) shuffled[k] = ry[perm[k]];
      const double r = dot(rx, shuffled) / norm;
      const bool extreme = sided == Sidedness::two_sided ? std::fabs(r) >= std::fabs(rho) - eps
                           : rho >= 0                    ? r >= rho - eps
                                                         : r <= rho + eps;
      hits += extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    result.p_value = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    result.method = PValueMethod::t_approximation;
    if (1.0 - std::fabs(rho) <= 1e-15) {
      result.p_value = 0;
    } else {
      const double df = static_cast<double>(n - 2);
      const double t = rho * std::sqrt(df / (1.0 - rho * rho));
      const boost::math::students_t dist(df);
      const double tail = boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
      result.p_value = std::min(1.0, sided == Sidedness::two_sided ? 2 * tail : tail);
    }
  }
  return result;
}

Histogram histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins == 0) throw ShapeError("histogram needs at least one bin");
  Histogram h;
  for (std::size_t k = 0; k <= bins; ++k) {
    h.edges.push_back(static_cast<double>(k) / static_cast<double>(bins));
  }
  h.counts.assign(bins, 0);
  for (double v : values) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    // Largest k with edges[k] <= v, capped so that 1 falls in the last bin.
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(h.edges.begin(), h.edges.end(), clamped) - h.edges.begin());
    k = std::min(k == 0 ? 0 : k - 1, bins - 1);
    ++h.counts[k];
  }
  return h;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : (values[m - 1] + values[m]) / 2.0;
}

FractionSummary summarize_fractions(const std::vector<FractionSample>& samples,
                                    const SummaryOptions& options) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& s : samples) groups[{s.group, s.order}].push_back(s.gamma);
  FractionSummary summary;
  summary.options = options;
  for (auto& [key, values] : groups) {
    // Sorting first makes every float reduction independent of input order.
    std::sort(values.begin(), values.end());
    OrderSummary o;
    o.group = key.first;
    o.order = key.second;
    o.n = values.size();
    o.hist = histogram(values, options.bins);
    o.median = median(values);
    o.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(o.n);
    o.min = values.front();
    o.max = values.back();
    const auto above = std::count_if(values.begin(), values.end(),
                                     [&](double g) { return g > options.threshold; });
    o.share_above = static_cast<double>(above) / static_cast<double>(o.n);
    summary.orders.push_back(std::move(o));
  }
  return summary;
}

json to_json(const FractionSummary& summary) {
  json orders = json::array();
  for (const auto& o : summary.orders) {
    orders.push_back({{"group", o.group},
                      {"order", o.order},
                      {"n", o.n},
                      {"bin_edges", o.hist.edges},
                      {"counts", o.hist.counts},
                      {"median", o.median},
                      {"mean", o.mean},
                      {"min", o.min},
                      {"max", o.max},
                      {"share_above_threshold", o.share_above}});
  }
  return {{"bins", summary.options.bins},
          {"threshold", summary.options.threshold},
          {"orders", std::move(orders)}};
}

std::vector<CorrelationEntry> correlation_table(const std::vector<LabeledModel>& models,
                                                Sidedness sided) {
  struct Slot {
    const char* prefix;
    const char* type;
    const char* order;
  };
  const Slot sv{"SV", "subject_verb", "S->V"};
  const Slot vo{"VO", "verb_object", "O->V"};
  const std::vector<std::pair<Slot, std::string>> layout{
      {sv, "homonymous_total"}, {vo, "homonymous_total"}, {sv, "homonymous_verb"},
      {vo, "homonymous_verb"},  {sv, "homonymous_noun"},  {vo, "homonymous_noun"},
  };

  std::vector<CorrelationEntry> table;
  for (const auto& [slot, predictor] : layout) {
    CorrelationEntry e;
    e.name = std::string(slot.prefix) + "_vs_" + predictor;
    e.phrase_type = slot.type;
    e.order = slot.order;
    e.predictor = predictor;
    for (const auto& m : models) {
      if (m.phrase_type != slot.type) continue;
      if (!m.noun_homonymous || !m.verb_homonymous) {
        throw MissingMetaError("model '" + m.model_id + "' has no ambiguity counts");
      }
      auto it = std::find_if(m.fractions.begin(), m.fractions.end(),
                             [&](const auto& f) { return f.first == slot.order; });
      if (it == m.fractions.end()) {
        throw MissingMetaError("model '" + m.model_id + "' has no " + slot.order + " fraction");
      }
      int count = *m.noun_homonymous + *m.verb_homonymous;
      if (predictor == "homonymous_verb") count = *m.verb_homonymous;
      if (predictor == "homonymous_noun") count = *m.noun_homonymous;
      e.model_ids.push_back(m.model_id);
      e.x.push_back(count);
      e.y.push_back(it->second);
    }
    if (e.x.size() < 3) {
      e.note = "fewer than 3 " + std::string(slot.type) + " models";
    } else {
      try {
        e.vs_homonymous = spearman(e.x, e.y, sided);
        e.vs_polysemous = *e.vs_homonymous;
        e.vs_polysemous->rho = -e.vs_homonymous->rho;
      } catch (const ConstantInputError& err) {
        e.note = err.what();
      }
    }
    table.push_back(std::move(e));
  }
  return table;
}

json to_json(const CorrelationResult& r) {
  return {{"rho", r.rho},
          {"p_value", r.p_value},
          {"n", r.n},
          {"method", p_value_method_name(r.method)},
          {"sidedness", sidedness_name(r.sided)}};
}

json to_json(const std::vector<CorrelationEntry>& table) {
  json out = json::array();
  for (const auto& e : table) {
    json item = {{"name", e.name},
                 {"phrase_type", e.phrase_type},
                 {"order", e.order},
                 {"predictor", e.predictor},
                 {"n", e.x.size()}};
    item["vs_homonymous"] = e.vs_homonymous ? to_json(*e.vs_homonymous) : json();
    item["vs_polysemous"] = e.vs_polysemous ? to_json(*e.vs_polysemous) : json();
    if (!e.note.empty()) item["note"] = e.note;
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Fixed-precision coordinate so SVG bytes do not depend on float noise.
std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr double kWidth = 480;
constexpr double kHeight = 320;
constexpr double kLeft = 56;
constexpr double kRight = 16;
constexpr double kTop = 32;
constexpr double kBottom = 44;

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void svg_open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << coord(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << xml_escape(title) << "</text>\n";
}

void svg_axes(std::ostringstream& os, const Frame& f, const std::vector<double>& xticks,
              const std::vector<double>& yticks, const std::string& xlabel,
              const std::string& ylabel) {
  const double bx = f.py(f.y0);
  const double lx = f.px(f.x0);
  os << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(bx) << "\" x2=\"" << coord(f.px(f.x1))
     << "\" y2=\"" << coord(bx) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(bx) << "\" x2=\"" << coord(lx)
     << "\" y2=\"" << coord(f.py(f.y1)) << "\" stroke=\"black\"/>\n";
  for (double t : xticks) {
    os << "<line x1=\"" << coord(f.px(t)) << "\" y1=\"" << coord(bx) << "\" x2=\""
       << coord(f.px(t)) << "\" y2=\"" << coord(bx + 4) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << coord(f.px(t)) << "\" y=\"" << coord(bx + 16)
       << "\" text-anchor=\"middle\">" << format_double(t) << "</text>\n";
  }
  for (double t : yticks) {
    os << "<line x1=\"" << coord(lx - 4) << "\" y1=\"" << coord(f.py(t)) << "\" x2=\""
       << coord(lx) << "\" y2=\"" << coord(f.py(t)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << coord(lx - 7) << "\" y=\"" << coord(f.py(t) + 4)
       << "\" text-anchor=\"end\">" << format_double(t) << "</text>\n";
  }
  os << "<text x=\"" << coord((lx + f.px(f.x1)) / 2) << "\" y=\"" << coord(kHeight - 8)
     << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"14\" y=\"" << coord((bx + f.py(f.y1)) / 2)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << coord((bx + f.py(f.y1)) / 2)
     << ")\">" << xml_escape(ylabel) << "</text>\n";
}

std::vector<double> count_ticks(std::size_t max_count) {
  const std::size_t step = std::max<std::size_t>(1, (max_count + 4) / 5);
  std::vector<double> ticks;
  for (std::size_t t = 0; t <= max_count; t += step) ticks.push_back(static_cast<double>(t));
  return ticks;
}

std::string histogram_svg(const OrderSummary& o, std::size_t y_max) {
  std::ostringstream os;
  svg_open(os, o.group + " " + o.order + " (n=" + std::to_string(o.n) + ")");
  const Frame f{0, 1, 0, static_cast<double>(y_max)};
  for (std::size_t k = 0; k < o.hist.counts.size(); ++k) {
    if (o.hist.counts[k] == 0) continue;
    const double x = f.px(o.hist.edges[k]);
    const double w = f.px(o.hist.edges[k + 1]) - x;
    const double top = f.py(static_cast<double>(o.hist.counts[k]));
    os << "<rect x=\"" << coord(x) << "\" y=\"" << coord(top) << "\" width=\"" << coord(w)
       << "\" height=\"" << coord(f.py(0) - top)
       << "\" fill=\"#4c72b0\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  svg_axes(os, f, {0, 0.25, 0.5, 0.75, 1}, count_ticks(y_max), "causal fraction", "models");
  os << "</svg>\n";
  return os.str();
}

std::string scatter_svg(const CorrelationEntry& e, double x_max) {
  std::ostringstream os;
  std::string title = e.name;
  if (e.vs_homonymous) {
    title += " rho=" + coord(e.vs_homonymous->rho) + " p=" + coord(e.vs_homonymous->p_value);
  }
  svg_open(os, title);
  const Frame f{-0.5, x_max + 0.5, 0, 1};
  for (std::size_t k = 0; k < e.x.size(); ++k) {
    os << "<circle cx=\"" << coord(f.px(e.x[k])) << "\" cy=\"" << coord(f.py(e.y[k]))
       << "\" r=\"3\" fill=\"#dd8452\" fill-opacity=\"0.6\"/>\n";
  }
  std::vector<double> xticks;
  for (int t = 0; t <= static_cast<int>(x_max); ++t) xticks.push_back(t);
  svg_axes(os, f, xticks, {0, 0.25, 0.5, 0.75, 1}, "homonymous words (" + e.predictor + ")",
           e.order + " causal fraction");
  os << "</svg>\n";
  return os.str();
}

}  // namespace

json emit_plots(const FractionSummary& summary, const std::vector<CorrelationEntry>& correlations,
                const std::filesystem::path& dir, const std::filesystem::path& base) {
  json files = json::array();
  auto record = [&](const std::filesystem::path& path, const std::string& text, json info) {
    write_text_file(path, text);
    info["path"] = std::filesystem::relative(path, base).generic_string();
    files.push_back(std::move(info));
  };

  std::size_t y_max = 1;
  for (const auto& o : summary.orders) {
    for (std::size_t c : o.hist.counts) y_max = std::max(y_max, c);
  }
  for (const auto& o : summary.orders) {
    const std::string stem = "histogram_" + file_token(o.group) + "_" + file_token(o.order);
    std::ostringstream csv;
    csv << "bin_lower,bin_upper,count\n";
    for (std::size_t k = 0; k < o.hist.counts.size(); ++k) {
      csv << format_double(o.hist.edges[k]) << ',' << format_double(o.hist.edges[k + 1]) << ','
          << o.hist.counts[k] << '\n';
    }
    const json info = {{"kind", "histogram"}, {"group", o.group}, {"order", o.order}};
    json c = info;
    c["format"] = "csv";
    record(dir / (stem + ".csv"), csv.str(), c);
    json s = info;
    s["format"] = "svg";
    record(dir / (stem + ".svg"), histogram_svg(o, y_max), s);
  }

  for (const auto& e : correlations) {
    if (e.x.empty()) continue;
    const std::string stem = "scatter_" + file_token(e.name);
    std::ostringstream csv;
    csv << "model_id,homonymous_count,fraction\n";
    for (std::size_t k = 0; k < e.x.size(); ++k) {
      csv << csv::escape(e.model_ids[k]) << ',' << format_double(e.x[k]) << ','
          << format_double(e.y[k]) << '\n';
    }
    const double x_max = e.predictor == "homonymous_total" ? 4 : 2;
    const json info = {{"kind", "scatter"}, {"correlation", e.name}, {"order", e.order}};
    json c = info;
    c["format"] = "csv";
    record(dir / (stem + ".csv"), csv.str(), c);
    json s = info;
    s["format"] = "svg";
    record(dir / (stem + ".svg"), scatter_svg(e, x_max), s);
  }
  return files;
}

}  // namespace caufrac::stats
