#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "caufrac/empirical_model.hpp"
#include "caufrac/fraction.hpp"

namespace caufrac::testing {

inline Rational Q(const char* text) { return parse_rational(text); }

/// n/d in lowest terms; mpq's two-argument constructor does not reduce.
inline Rational ratio(long n, long d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::filesystem::path data_dir() { return CAUFRAC_TEST_DATA; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Every regular file under `root`, keyed by relative path.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(root)) return out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out[entry.path().lexically_relative(root).generic_string()] = slurp(entry.path());
  }
  return out;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

/// Runs the CLI binary with `args`, capturing both streams.
inline CommandResult run_cli(const std::vector<std::string>& args) {
  static int counter = 0;
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("caufrac_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::string cmd = shell_quote(CAUFRAC_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote(tmp.string() + ".out") + " 2>" + shell_quote(tmp.string() + ".err");
  CommandResult r;
  const int status = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(tmp.string() + ".out");
  r.err = slurp(tmp.string() + ".err");
  std::filesystem::remove(tmp.string() + ".out");
  std::filesystem::remove(tmp.string() + ".err");
  return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("caufrac_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<Event> binary_events(std::size_t n, const char* names = "ABCDEFGH") {
  std::vector<Event> events;
  for (std::size_t k = 0; k < n; ++k) events.push_back({std::string(1, names[k]), {"0", "1"}, {"0", "1"}});
  return events;
}

/// Two binary events A, B with the given order.
inline CausalScenario bell_scenario(OrderRelation order = {}) {
  return CausalScenario::validate(binary_events(2), std::move(order));
}

inline RationalModel rational_model(const CausalScenario& s,
                                    const std::vector<std::vector<const char*>>& rows) {
  std::vector<std::vector<Rational>> table;
  for (const auto& r : rows) {
    auto& out = table.emplace_back();
    for (const char* p : r) out.push_back(Q(p));
  }
  return RationalModel::from_table(s, std::move(table));
}

/// The worked example whose A->B fraction is 13/42.
inline RationalModel example_model(OrderRelation order = {}) {
  return rational_model(bell_scenario(std::move(order)), {{"0", "1/7", "0", "6/7"},
                                                          {"2/3", "1/6", "1/6", "0"},
                                                          {"1/4", "0", "1/4", "1/2"},
                                                          {"1/5", "3/5", "1/5", "0"}});
}

/// The A->B compatible model that 13/42 of the example is made of.
inline RationalModel eq2_model(OrderRelation order = {{"A", "B"}}) {
  return rational_model(bell_scenario(std::move(order)), {{"0", "6/13", "0", "7/13"},
                                                          {"24/65", "6/65", "7/13", "0"},
                                                          {"23/65", "0", "14/65", "28/65"},
                                                          {"23/260", "69/260", "42/65", "0"}});
}

inline RationalModel uniform_model(const CausalScenario& s) {
  const std::size_t n_out = s.output_indexer().size();
  std::vector<std::vector<Rational>> rows(s.input_indexer().size(),
                                          std::vector<Rational>(n_out, Rational(1, n_out)));
  return RationalModel::from_table(s, std::move(rows));
}

/// PR box: outputs agree unless both inputs are 1.
inline RationalModel pr_box() {
  return rational_model(bell_scenario(), {{"1/2", "0", "0", "1/2"},
                                          {"1/2", "0", "0", "1/2"},
                                          {"1/2", "0", "0", "1/2"},
                                          {"0", "1/2", "1/2", "0"}});
}

/// Product model p(o_A) q(o_B), no input dependence.
inline RationalModel product_model(const Rational& p, const Rational& q) {
  const Rational pa[2] = {p, 1 - p};
  const Rational qb[2] = {q, 1 - q};
  std::vector<std::vector<Rational>> rows(4, std::vector<Rational>(4));
  for (auto& row : rows) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) row[2 * a + b] = pa[a] * qb[b];
    }
  }
  return RationalModel::from_table(bell_scenario(), std::move(rows));
}

/// Hand-rolled generators over a seeded engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double unit() { return std::uniform_real_distribution<double>(0, 1)(rng_); }

  /// Random rational distribution of `size` entries with small denominators;
  /// roughly one entry in five is zero.
  std::vector<Rational> distribution(std::size_t size, long max_weight = 12) {
    std::vector<long> w(size);
    long total = 0;
    while (total == 0) {
      total = 0;
      for (auto& x : w) {
        x = coin(0.2) ? 0 : 1 + static_cast<long>(below(static_cast<std::size_t>(max_weight)));
        total += x;
      }
    }
    std::vector<Rational> out;
    for (long x : w) {
      out.push_back(ratio(x, total));
    }
    return out;
  }

  RationalModel model(const CausalScenario& s) {
    std::vector<std::vector<Rational>> rows;
    for (std::size_t i = 0; i < s.input_indexer().size(); ++i) {
      rows.push_back(distribution(s.output_indexer().size()));
    }
    return RationalModel::from_table(s, std::move(rows));
  }

  /// Random model that is exactly compatible with the scenario's order: a
  /// mixture of a few deterministic causal sections.
  RationalModel compatible_model(const CausalScenario& s) {
    const auto sections = enumerate_sections(s, full_element(s));
    const JointIndexer in = s.input_indexer();
    const JointIndexer out = s.output_indexer();
    const auto weights = distribution(3);
    std::vector<std::vector<Rational>> rows(in.size(), std::vector<Rational>(out.size()));
    for (const auto& w : weights) {
      const auto& f = sections[below(sections.size())];
      for (std::size_t k = 0; k < f.size(); ++k) {
        rows[in.encode(f.inputs()[k])][out.encode(f.outputs()[k])] += w;
      }
    }
    return RationalModel::from_table(s, std::move(rows));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline RationalModel mix(const RationalModel& a, const RationalModel& b, const Rational& lambda) {
  std::vector<std::vector<Rational>> rows = a.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t o = 0; o < rows[i].size(); ++o) {
      rows[i][o] = lambda * a.at(i, o) + (1 - lambda) * b.at(i, o);
    }
  }
  return RationalModel::from_table(a.scenario(), std::move(rows));
}

}  // namespace caufrac::testing
