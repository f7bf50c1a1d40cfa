#include "wrinkle/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wrinkle/errors.hpp"

namespace wrinkle {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void type_error(const std::string& key, int line,
                             const char* want, const std::string& got) {
  std::ostringstream os;
  os << "line " << line << ": key '" << key << "' expects " << want
     << ", got '" << got << "'";
  throw TypeMismatch(os.str());
}

void assign(RunConfig& cfg, const std::string& key, const ParamSpec& spec,
            const std::string& value, int line) {
  switch (spec.type) {
    case ParamType::integer: {
      std::size_t used = 0;
      std::int64_t v = 0;
      try {
        v = std::stoll(value, &used);
      } catch (const std::exception&) {
        type_error(key, line, "an integer", value);
      }
      if (used != value.size()) type_error(key, line, "an integer", value);
      cfg.ints[key] = v;
      break;
    }
    case ParamType::real: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        type_error(key, line, "a real", value);
      }
      if (used != value.size()) type_error(key, line, "a real", value);
      cfg.reals[key] = v;
      break;
    }
    case ParamType::boolean: {
      if (value == "true" || value == "1") {
        cfg.bools[key] = true;
      } else if (value == "false" || value == "0") {
        cfg.bools[key] = false;
      } else {
        type_error(key, line, "a boolean (true/false)", value);
      }
      break;
    }
    case ParamType::text:
      cfg.strings[key] = value;
      break;
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing: " +
                  std::strerror(errno));
  }
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

std::int64_t RunConfig::get_int(const std::string& key) const {
  const auto it = ints.find(key);
  if (it == ints.end()) throw MissingRequired("integer key '" + key + "'");
  return it->second;
}

double RunConfig::get_real(const std::string& key) const {
  const auto it = reals.find(key);
  if (it == reals.end()) throw MissingRequired("real key '" + key + "'");
  return it->second;
}

const std::string& RunConfig::get_string(const std::string& key) const {
  const auto it = strings.find(key);
  if (it == strings.end()) throw MissingRequired("string key '" + key + "'");
  return it->second;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto it = bools.find(key);
  if (it == bools.end()) throw MissingRequired("boolean key '" + key + "'");
  return it->second;
}

bool RunConfig::has(const std::string& key) const {
  return ints.count(key) || reals.count(key) || strings.count(key) ||
         bools.count(key);
}

RunConfig parse_config(const std::string& text, const ConfigSchema& schema) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "line " << line << ": expected 'key = value', got '" << stripped
         << "'";
      throw TypeMismatch(os.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = schema.find(key);
    if (it == schema.end()) {
      std::ostringstream os;
      os << "line " << line << ": unknown key '" << key << "'";
      throw UnknownKey(os.str());
    }
    assign(cfg, key, it->second, value, line);
  }
  for (const auto& [key, spec] : schema) {
    if (cfg.has(key)) continue;
    if (spec.required) {
      throw MissingRequired("key '" + key + "' must be set");
    }
    if (spec.fallback) assign(cfg, key, spec, *spec.fallback, 0);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path,
                            const ConfigSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), schema);
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

void write_mesh(const Immersion& y, const std::string& path) {
  const Grid2D& g = y.grid;
  if (g.nx < 2 || g.ny < 2) {
    throw DegenerateSurface("write_mesh: grid must be at least 2x2");
  }
  std::ofstream out = open_out(path);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Eigen::Vector3d& p = y.at(i, j);
      out << "v " << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' '
          << fmt17(p.z()) << '\n';
    }
  }
  auto id = [&](int i, int j) { return j * g.nx + i + 1; };
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      out << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1)
          << ' ' << id(i, j + 1) << '\n';
    }
  }
  finish_out(out, path);
}

void write_diagnostics(const std::vector<StageDiagnostics>& rows,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  out << "q,deficit_sup,c0_step,c1_step,c2_norm,lambda_max\n";
  for (const auto& r : rows) {
    out << r.q << ',' << fmt17(r.deficit_sup) << ',' << fmt17(r.c0_step)
        << ',' << fmt17(r.c1_step) << ',' << fmt17(r.c2_norm) << ','
        << fmt17(r.lambda_max) << '\n';
  }
  finish_out(out, path);
}

void write_report(const std::vector<std::pair<std::string, double>>& rows,
                  const std::string& path) {
  std::ofstream out = open_out(path);
  out << "name,value\n";
  for (const auto& [name, value] : rows) {
    out << name << ',' << fmt17(value) << '\n';
  }
  finish_out(out, path);
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["version"] = m.version;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : m.config.ints) cfg[k] = v;
  for (const auto& [k, v] : m.config.reals) cfg[k] = v;
  for (const auto& [k, v] : m.config.strings) cfg[k] = v;
  for (const auto& [k, v] : m.config.bools) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = m.seed;
  j["grid"] = {{"nx", m.grid_nx}, {"ny", m.grid_ny}};
  j["order"] = m.order;
  nlohmann::ordered_json diag;
  for (const auto& [k, v] : m.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  j["outputs"] = m.outputs;
  j["error"] = m.error;
  j["wall_seconds"] = m.wall_seconds;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out = open_out(tmp);
    out << manifest_to_json(m);
    finish_out(out, tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot rename '" + tmp + "' to '" + path + "': " +
                  std::strerror(errno));
  }
}

}  // namespace wrinkle
