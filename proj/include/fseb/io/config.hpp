#ifndef FSEB_IO_CONFIG_HPP
#define FSEB_IO_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fseb/simlab/scenario.hpp"

namespace fseb::io {

using simlab::ConfigError;

/// One `key = value` entry. Values are a number, a quoted string or a flat
/// list of numbers.
struct ConfigValue {
  std::variant<double, std::string, std::vector<double>> value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, ConfigValue> entries;
};

/// Flat TOML subset: `# comments`, `[section]` headers, and key = value lines.
/// Keys before the first section are defaults for every section.
struct ConfigFile {
  std::string source = "<config>";
  ConfigSection defaults;
  std::vector<ConfigSection> sections;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"')
      quoted = !quoted;
    else if (line[i] == '#' && !quoted)
      return line.substr(0, i);
  }
  return line;
}

} // namespace detail

inline ConfigFile parse_config(std::istream& in, const std::string& source = "<config>") {
  ConfigFile cfg;
  cfg.source = source;
  ConfigSection* current = &cfg.defaults;
  std::string raw;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string stripped = detail::strip_comment(raw);
    const std::string_view line = detail::trim(stripped);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw fail("section header must end with ']'");
      const std::string name(detail::trim(line.substr(1, line.size() - 2)));
      if (name.empty())
        throw fail("empty section name");
      for (const auto& s : cfg.sections)
        if (s.name == name)
          throw fail("duplicate section [" + name + "]");
      cfg.sections.push_back({name, lineno, {}});
      current = &cfg.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw fail("expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw fail("missing key before '='");
    if (current->entries.count(key))
      throw fail("field '" + key + "' given twice");
    ConfigValue v;
    v.line = lineno;
    if (val.empty()) {
      throw fail("field '" + key + "' has no value");
    } else if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        throw fail("field '" + key + "': unterminated string");
      v.value = std::string(val.substr(1, val.size() - 2));
    } else if (val.front() == '[') {
      if (val.back() != ']')
        throw fail("field '" + key + "': list must end with ']'");
      std::vector<double> xs;
      std::string_view body = detail::trim(val.substr(1, val.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        const std::string_view item = detail::trim(body.substr(0, comma));
        double x = 0.0;
        if (!detail::parse_number(item, x))
          throw fail("field '" + key + "': '" + std::string(item) + "' is not a number");
        xs.push_back(x);
        if (comma == std::string_view::npos)
          break;
        body = detail::trim(body.substr(comma + 1));
      }
      if (xs.empty())
        throw fail("field '" + key + "': empty list");
      v.value = std::move(xs);
    } else {
      double x = 0.0;
      if (!detail::parse_number(val, x))
        throw fail("field '" + key + "': '" + std::string(val) + "' is not a number");
      v.value = x;
    }
    current->entries[key] = std::move(v);
  }
  return cfg;
}

namespace detail {

class SectionReader {
public:
  SectionReader(const ConfigFile& file, const ConfigSection& sec) : file_(file), sec_(sec) {}

  [[nodiscard]] const ConfigValue* find(const std::string& key) const {
    if (auto it = sec_.entries.find(key); it != sec_.entries.end())
      return &it->second;
    if (auto it = file_.defaults.entries.find(key); it != file_.defaults.entries.end())
      return &it->second;
    return nullptr;
  }

  [[nodiscard]] ConfigError error(const ConfigValue* v, const std::string& key,
                                  const std::string& msg) const {
    const std::size_t line = v ? v->line : sec_.line;
    return ConfigError(file_.source + ":" + std::to_string(line) + ": [" + sec_.name +
                       "] field '" + key + "': " + msg);
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v)
      throw error(nullptr, key, "missing");
    if (auto d = std::get_if<double>(&v->value))
      return {*d};
    if (auto l = std::get_if<std::vector<double>>(&v->value))
      return *l;
    throw error(v, key, "expected a number or list of numbers");
  }

  [[nodiscard]] double number(const std::string& key, std::optional<double> fallback = {}) const {
    const ConfigValue* v = find(key);
    if (!v) {
      if (fallback)
        return *fallback;
      throw error(nullptr, key, "missing");
    }
    if (auto d = std::get_if<double>(&v->value))
      return *d;
    throw error(v, key, "expected a single number");
  }

  [[nodiscard]] std::uint64_t count(const std::string& key, double lo,
                                    std::optional<double> fallback = {}) const {
    const double d = number(key, fallback);
    if (!(d >= lo) || d != std::floor(d) || d > 9.0e15)
      throw error(find(key), key, "expected a whole number >= " + std::to_string(static_cast<long long>(lo)));
    return static_cast<std::uint64_t>(d);
  }

  [[nodiscard]] std::string text(const std::string& key, std::optional<std::string> fallback = {}) const {
    const ConfigValue* v = find(key);
    if (!v) {
      if (fallback)
        return *fallback;
      throw error(nullptr, key, "missing");
    }
    if (auto s = std::get_if<std::string>(&v->value))
      return *s;
    throw error(v, key, "expected a quoted string");
  }

  void check_known(const std::vector<std::string>& known) const {
    auto check = [&](const ConfigSection& s) {
      for (const auto& [k, v] : s.entries) {
        bool ok = false;
        for (const auto& name : known)
          ok = ok || name == k;
        if (!ok)
          throw error(&v, k, "unknown field");
      }
    };
    check(sec_);
  }

private:
  const ConfigFile& file_;
  const ConfigSection& sec_;
};

inline std::string number_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

} // namespace detail

/// Turns each section into one scenario, or several when `n` or `delta` is a
/// list (ids then get "/n=.." and "/delta=.." suffixes, n varying slowest).
inline std::vector<simlab::ScenarioConfig> scenarios_from(const ConfigFile& file) {
  using simlab::Study;
  if (file.sections.empty())
    throw ConfigError(file.source + ": no [scenario] sections");
  std::vector<simlab::ScenarioConfig> out;
  for (const auto& sec : file.sections) {
    const detail::SectionReader rd(file, sec);
    const std::string tag = rd.text("study");
    const auto study = simlab::study_from_tag(tag);
    if (!study)
      throw rd.error(rd.find("study"), "study",
                     "unknown study '" + tag + "' (stein, pg_ci, pg_test, bb_test, bb_power, bb_null)");
    std::vector<std::string> known = {"study", "n", "alpha", "reps", "seed"};
    simlab::ScenarioConfig base;
    base.study = *study;
    base.id = sec.name;
    std::vector<std::string> hyper_keys;
    switch (*study) {
    case Study::Stein: hyper_keys = {"psi_sq"}; break;
    case Study::PoissonCI:
    case Study::PoissonTest: hyper_keys = {"a", "b"}; break;
    case Study::BinomialTest: hyper_keys = {"gamma", "beta"}; break;
    default: break;
    }
    for (const auto& k : hyper_keys) {
      const double h = rd.number(k);
      if (!(h > 0.0))
        throw rd.error(rd.find(k), k, "must be positive");
      base.hyper.push_back(h);
      known.push_back(k);
    }
    const bool uses_w = *study == Study::PoissonCI || *study == Study::PoissonTest;
    const bool uses_m = *study == Study::BinomialTest || *study == Study::BinomialPower ||
                        *study == Study::BinomialNull;
    if (uses_w) {
      known.insert(known.end(), {"w_lo", "w_hi"});
      base.w_lo = rd.number("w_lo", 0.0);
      base.w_hi = rd.number("w_hi", 10.0);
      if (!(base.w_lo >= 0.0 && base.w_hi > base.w_lo))
        throw rd.error(rd.find("w_hi"), "w_hi", "need 0 <= w_lo < w_hi");
    }
    if (uses_m) {
      known.insert(known.end(), {"m_lo", "m_hi"});
      base.m_lo = static_cast<std::int64_t>(rd.count("m_lo", 1, 15.0));
      base.m_hi = static_cast<std::int64_t>(rd.count("m_hi", 1, 40.0));
      if (base.m_hi < base.m_lo)
        throw rd.error(rd.find("m_hi"), "m_hi", "must be >= m_lo");
    }
    if (*study == Study::BinomialTest) {
      known.push_back("shift");
      const std::string shift = rd.text("shift", std::string("scale"));
      if (shift == "scale")
        base.shift = simlab::ShiftRule::Scale;
      else if (shift == "clamp")
        base.shift = simlab::ShiftRule::Clamp;
      else
        throw rd.error(rd.find("shift"), "shift", "expected \"scale\" or \"clamp\"");
    }
    if (*study == Study::BinomialPower) {
      known.push_back("deltas");
      base.deltas = rd.numbers("deltas");
      for (double d : base.deltas)
        if (!(d > 0.0 && d < 0.9))
          throw rd.error(rd.find("deltas"), "deltas", "values must lie in (0, 0.9)");
    }
    const bool has_delta = *study == Study::PoissonTest || *study == Study::BinomialTest;
    std::vector<double> delta_list{0.0};
    if (has_delta) {
      known.push_back("delta");
      delta_list = rd.numbers("delta");
      for (double d : delta_list)
        if (!(d >= 0.0) || (*study == Study::BinomialTest && !(d < 1.0)))
          throw rd.error(rd.find("delta"), "delta",
                         *study == Study::BinomialTest ? "must lie in [0, 1)" : "must be >= 0");
    }
    rd.check_known(known);

    base.alphas = rd.numbers("alpha");
    for (double a : base.alphas)
      if (!(a > 0.0 && a < 1.0))
        throw rd.error(rd.find("alpha"), "alpha",
                       "value " + detail::number_label(a) + " outside (0, 1)");
    base.replications = rd.count("reps", 1);
    base.base_seed = rd.count("seed", 0, 1.0);

    const std::size_t min_n = *study == Study::PoissonTest ? 4 : 3;
    std::vector<double> n_list = rd.numbers("n");
    for (double n : n_list)
      if (!(n >= static_cast<double>(min_n)) || n != std::floor(n))
        throw rd.error(rd.find("n"), "n",
                       "expected a whole number >= " + std::to_string(min_n));

    for (double n : n_list)
      for (double d : delta_list) {
        simlab::ScenarioConfig c = base;
        c.n = static_cast<std::size_t>(n);
        c.delta = d;
        if (n_list.size() > 1)
          c.id += "/n=" + detail::number_label(n);
        if (delta_list.size() > 1)
          c.id += "/delta=" + detail::number_label(d);
        try {
          c.validate();
        } catch (const ConfigError& e) {
          throw ConfigError(file.source + ":" + std::to_string(sec.line) + ": " + e.what());
        }
        out.push_back(std::move(c));
      }
  }
  return out;
}

} // namespace fseb::io

#endif
