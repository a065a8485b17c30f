#include "lorenzlab/config.hpp"

#include <sstream>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"

namespace lorenzlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      }
      cfg.sections_[section];  // register even if empty
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any [section]");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return parse_double(get(section, key, ""));
  } catch (const IoError&) {
    throw ConfigError("config [" + section + "] " + key + ": not a number");
  }
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return parse_int(get(section, key, ""));
  } catch (const IoError&) {
    throw ConfigError("config [" + section + "] " + key + ": not an integer");
  }
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get(section, key, "");
  std::vector<int> out;
  std::string cell;
  std::istringstream in(raw);
  while (std::getline(in, cell, ',')) {
    const std::string t = trim(cell);
    if (t.empty()) continue;
    try {
      out.push_back(static_cast<int>(parse_int(t)));
    } catch (const IoError&) {
      throw ConfigError("config [" + section + "] " + key + ": not an integer list");
    }
  }
  if (out.empty()) {
    throw ConfigError("config [" + section + "] " + key + ": empty list");
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

void Config::set_double(const std::string& section, const std::string& key, double value) {
  set(section, key, format_double(value));
}

void Config::set_int(const std::string& section, const std::string& key, long long value) {
  set(section, key, format_int(value));
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [section, kv] : sections_) {
    out += "[" + section + "]\n";
    for (const auto& [key, value] : kv) {
      out += key + " = " + value + "\n";
    }
  }
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical()); }

Config default_config() {
  Config c;
  c.set_double("lorenz", "rho", 0.75);
  c.set_double("lorenz", "scale", 2.0);
  c.set_double("lorenz", "beta", 0.2);
  c.set_double("lorenz", "gamma", 0.5);
  c.set_double("lorenz", "theta", 0.25);
  c.set_double("lorenz", "roof_c0", 1.0);
  c.set_double("lorenz", "roof_c1", 0.5);
  c.set_double("lorenz", "ode_a", 10.0);
  c.set_double("lorenz", "ode_b", 28.0);
  c.set_double("lorenz", "ode_c", 8.0 / 3.0);

  c.set_double("inducing", "delta", 0.5);
  c.set_int("inducing", "max_time", 40);
  c.set_double("inducing", "min_length", 1e-9);

  c.set_int("measure", "bins", 2048);
  c.set_int("measure", "mc_samples", 100);
  c.set_int("measure", "depth", 2);
  c.set_int("measure", "n_truncation", 30);

  c.set_int("cocycle", "d", 2);
  c.set_int("cocycle", "depth", 1);
  c.set_double("cocycle", "epsilon", 0.3);
  c.set_double("cocycle", "eta", 1.0);
  c.set_double("cocycle", "tau", 0.95);

  c.set_int("experiment", "trials", 1000);
  c.set("experiment", "d_list", "2,3");
  c.set_int("experiment", "n_iterates", 100000);
  c.set_double("experiment", "gap_tolerance", 1e-3);
  c.set_int("experiment", "seed", 1);
  c.set("experiment", "output_dir", "out");
  c.set_int("experiment", "threads", 1);
  return c;
}

}  // namespace lorenzlab
