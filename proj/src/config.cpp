#include "sspsde/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sspsde::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key " + key + " wants a boolean, got '" + v + "'");
}

}  // namespace

KeyValues parse_ini(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("unterminated section header at line " +
                                    std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key=value at line " + std::to_string(lineno));
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("empty key at line " + std::to_string(lineno));
    if (!section.empty()) key = section + "." + key;
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

void ExperimentConfig::validate() const {
  if (experiment.empty()) throw std::invalid_argument("config: experiment not set");
  if (nx < 4 || ny < 4) throw std::invalid_argument("config: nx, ny must be at least 4");
  if (nt < 1) throw std::invalid_argument("config: nt must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
  if (ensemble < 1) throw std::invalid_argument("config: ensemble must be at least 1");
  if (split_m < 1 || split_n < 1)
    throw std::invalid_argument("config: splitting substep counts must be at least 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be at least 1");
}

ExperimentConfig config_from_keyvalues(const KeyValues& kv, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  for (const auto& [key, value] : kv) {
    if (key == "experiment.name" || key == "experiment")
      c.experiment = value;
    else if (key == "grid.nx")
      c.nx = std::stoi(value);
    else if (key == "grid.ny")
      c.ny = std::stoi(value);
    else if (key == "time.nt")
      c.nt = std::stoi(value);
    else if (key == "time.t_end")
      c.t_end = std::stod(value);
    else if (key == "noise.seed")
      c.seed = std::stoull(value);
    else if (key == "noise.sampler")
      c.sampler.kind = increments::kind_from_string(value);
    else if (key == "noise.k")
      c.sampler.k = std::stod(value);
    else if (key == "experiment.ensemble")
      c.ensemble = std::stoi(value);
    else if (key == "integrator.method")
      c.integrator = value;
    else if (key == "integrator.gamma")
      c.gamma = std::stod(value);
    else if (key == "integrator.m")
      c.split_m = std::stoi(value);
    else if (key == "integrator.n")
      c.split_n = std::stoi(value);
    else if (key == "integrator.limiter")
      c.limiter = parse_bool(value, key);
    else if (key == "integrator.stencil")
      c.stencil = fv2d::stencil_from_string(value);
    else if (key == "output.dir")
      c.output_dir = value;
    else if (key == "output.pgm")
      c.write_pgm = parse_bool(value, key);
    else if (key == "output.workers" || key == "experiment.workers")
      c.workers = std::stoi(value);
    else
      throw std::invalid_argument("unknown config key: " + key);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_keyvalues(load_ini(path));
}

}  // namespace sspsde::config
