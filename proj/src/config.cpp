#include "drg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "drg/csv.hpp"
#include "drg/error.hpp"

namespace drg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value, const char* type) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty())
    throw ConfigError("key '" + key + "' expects " + type + ", got '" + value + "'");
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DRG_INT(sec, name)                                                                          \
  Field {                                                                                           \
    sec, #name, [](RunConfig& c, const std::string& v) { c.name = parse_number<int>(#name, v, "an integer"); }, \
        [](const RunConfig& c) { return std::to_string(c.name); }                                   \
  }
#define DRG_REAL(sec, name)                                                                         \
  Field {                                                                                           \
    sec, #name, [](RunConfig& c, const std::string& v) { c.name = parse_number<double>(#name, v, "a number"); }, \
        [](const RunConfig& c) { return format_double(c.name); }                                    \
  }
#define DRG_TEXT(sec, name, key)                                                                    \
  Field {                                                                                           \
    sec, key, [](RunConfig& c, const std::string& v) { c.name = v; },                               \
        [](const RunConfig& c) { return c.name; }                                                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      DRG_TEXT("problem", preset, "preset"),
      DRG_REAL("problem", x0),
      DRG_INT("grid", n_steps),
      DRG_INT("grid", n_nodes),
      DRG_REAL("grid", x_min),
      DRG_REAL("grid", x_max),
      DRG_INT("mc", n_paths),
      Field{"mc", "seed",
            [](RunConfig& c, const std::string& v) {
              c.seed = parse_number<std::uint64_t>("seed", v, "a nonnegative integer");
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      DRG_INT("mc", u_index),
      DRG_INT("mc", v_index),
      DRG_TEXT("solver", order, "order"),
      DRG_TEXT("solver", mode, "mode"),
      DRG_TEXT("solver", basis, "basis"),
      DRG_INT("solver", basis_degree),
      DRG_INT("solver", n_bins),
      DRG_INT("solver", samples),
      DRG_INT("solver", levels),
      DRG_REAL("solver", t_mid),
      DRG_INT("solver", dynkin_trees),
      DRG_INT("solver", dynkin_depth),
      DRG_INT("solver", sqrt_trials),
      DRG_INT("solver", sqrt_max_dim),
      DRG_REAL("solver", sqrt_condition),
      DRG_INT("solver", sqrt_terms),
      DRG_TEXT("output", output_dir, "dir"),
  };
  return table;
}

#undef DRG_INT
#undef DRG_REAL
#undef DRG_TEXT

const char* const kSections[] = {"problem", "grid", "mc", "solver", "output"};

void require(bool ok, const char* key, const char* constraint) {
  if (!ok) throw ConfigError(format_message("key '%s' violates constraint: %s", key, constraint));
}

void check_constraints(const RunConfig& c) {
  require(c.n_steps >= 1, "n_steps", "n_steps >= 1");
  require(c.n_nodes >= 3, "n_nodes", "n_nodes >= 3");
  require(c.x_max > c.x_min, "x_max", "x_max > x_min");
  require(c.x0 >= c.x_min && c.x0 <= c.x_max, "x0", "x_min <= x0 <= x_max");
  require(c.n_paths >= 1, "n_paths", "n_paths >= 1");
  require(c.u_index >= 0, "u_index", "u_index >= 0");
  require(c.v_index >= 0, "v_index", "v_index >= 0");
  require(c.order == "supinf" || c.order == "infsup", "order", "one of supinf, infsup");
  require(c.mode == "lattice" || c.mode == "lsmc", "mode", "one of lattice, lsmc");
  require(c.basis == "polynomial" || c.basis == "bins", "basis", "one of polynomial, bins");
  require(c.basis_degree >= 0 && c.basis_degree <= 8, "basis_degree", "0 <= basis_degree <= 8");
  require(c.n_bins >= 1, "n_bins", "n_bins >= 1");
  require(c.samples >= 1, "samples", "samples >= 1");
  require(c.levels >= 1 && c.levels <= 6, "levels", "1 <= levels <= 6");
  require(c.t_mid > 0.0, "t_mid", "t_mid > 0");
  require(c.dynkin_trees >= 1, "dynkin_trees", "dynkin_trees >= 1");
  require(c.dynkin_depth >= 1 && c.dynkin_depth <= 4, "dynkin_depth", "1 <= dynkin_depth <= 4");
  require(c.sqrt_trials >= 1, "sqrt_trials", "sqrt_trials >= 1");
  require(c.sqrt_max_dim >= 1 && c.sqrt_max_dim <= 8, "sqrt_max_dim", "1 <= sqrt_max_dim <= 8");
  require(c.sqrt_condition >= 1.0, "sqrt_condition", "sqrt_condition >= 1");
  require(c.sqrt_terms >= 1, "sqrt_terms", "sqrt_terms >= 1");
  require(!c.output_dir.empty(), "dir", "non-empty output directory");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, int> seen;  // "section.key" -> line
  std::vector<std::pair<std::string, std::pair<std::string, int>>> preset_params;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(format_message("line %d: malformed section header", line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections))
        throw ConfigError(format_message("line %d: unknown section [%s]", line_no, section.c_str()));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(format_message("line %d: expected 'key = value'", line_no));
    if (section.empty())
      throw ConfigError(format_message("line %d: key outside of any section", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(format_message("line %d: empty key", line_no));
    const std::string full = section + "." + key;
    if (!seen.emplace(full, line_no).second)
      throw ConfigError(format_message("line %d: duplicate key '%s' in [%s]", line_no, key.c_str(),
                                       section.c_str()));

    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
      return section == f.section && key == f.key;
    });
    if (it != table.end()) {
      try {
        it->set(cfg, value);
      } catch (const ConfigError& e) {
        throw ConfigError(format_message("line %d: %s", line_no, e.what()));
      }
    } else if (section == "problem") {
      preset_params.push_back({key, {value, line_no}});
    } else {
      throw ConfigError(format_message("line %d: unknown key '%s' in [%s]", line_no, key.c_str(),
                                       section.c_str()));
    }
  }

  if (cfg.preset.empty()) throw ConfigError("missing key 'preset' in [problem]");
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), cfg.preset) == names.end())
    throw ConfigError("unknown preset '" + cfg.preset + "'");
  cfg.params = preset_defaults(cfg.preset);
  for (const auto& [key, entry] : preset_params) {
    if (!cfg.params.count(key))
      throw ConfigError(format_message("line %d: unknown key '%s' in [problem] for preset %s",
                                       entry.second, key.c_str(), cfg.preset.c_str()));
    cfg.params[key] = entry.first;
  }
  check_constraints(cfg);
  try {
    make_preset(cfg.preset, cfg.params);
  } catch (const ProblemError& e) {
    throw ConfigError(std::string("[problem]: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const char* sec : kSections) {
    out += "[";
    out += sec;
    out += "]\n";
    for (const auto& f : fields())
      if (std::string(f.section) == sec) out += std::string(f.key) + " = " + f.get(*this) + "\n";
    if (std::string(sec) == "problem")
      for (const auto& [k, v] : params) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

std::string RunConfig::manifest_lines() const {
  std::string out;
  for (const char* sec : kSections) {
    for (const auto& f : fields())
      if (std::string(f.section) == sec) out += std::string(sec) + "." + f.key + "=" + f.get(*this) + "\n";
    if (std::string(sec) == "problem")
      for (const auto& [k, v] : params) out += "problem." + k + "=" + v + "\n";
  }
  return out;
}

RunConfig config_from_manifest(const std::string& text) {
  std::map<std::string, std::string> by_section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(format_message("manifest line %d: expected key=value", line_no));
    const std::string key = line.substr(0, eq);
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    by_section[key.substr(0, dot)] += key.substr(dot + 1) + " = " + line.substr(eq + 1) + "\n";
  }
  std::string doc;
  for (const auto& [sec, body] : by_section) doc += "[" + sec + "]\n" + body;
  return parse_config(doc);
}

}  // namespace drg
