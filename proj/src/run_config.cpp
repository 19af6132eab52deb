#include "sdm/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sdm {

namespace {

template <typename T>
struct Field {
  const char* key;
  T& (*ref)(RunConfig&);
};

constexpr Field<double> kDoubleFields[] = {
    {"map.gradient_threshold", [](RunConfig& c) -> double& { return c.map.gradient_threshold; }},
    {"map.new_variance_inflation", [](RunConfig& c) -> double& { return c.map.new_variance_inflation; }},
    {"map.epipolar.idepth_min", [](RunConfig& c) -> double& { return c.map.epipolar.idepth_min; }},
    {"map.epipolar.idepth_max", [](RunConfig& c) -> double& { return c.map.epipolar.idepth_max; }},
    {"map.epipolar.step", [](RunConfig& c) -> double& { return c.map.epipolar.step; }},
    {"map.epipolar.min_epl_length", [](RunConfig& c) -> double& { return c.map.epipolar.min_epl_length; }},
    {"map.epipolar.min_search_length", [](RunConfig& c) -> double& { return c.map.epipolar.min_search_length; }},
    {"map.search.ambiguity_ratio", [](RunConfig& c) -> double& { return c.map.search.ambiguity_ratio; }},
    {"map.search.max_error", [](RunConfig& c) -> double& { return c.map.search.max_error; }},
    {"map.search.sigma_i", [](RunConfig& c) -> double& { return c.map.search.sigma_i; }},
    {"map.search.sigma_l", [](RunConfig& c) -> double& { return c.map.search.sigma_l; }},
    {"map.search.sigma_max", [](RunConfig& c) -> double& { return c.map.search.sigma_max; }},
    {"map.filter.gate", [](RunConfig& c) -> double& { return c.map.filter.gate; }},
    {"map.filter.fill_variance_inflation", [](RunConfig& c) -> double& { return c.map.filter.fill_variance_inflation; }},
    {"pipeline.clock_mhz", [](RunConfig& c) -> double& { return c.pipeline.clock_mhz; }},
};

constexpr Field<int> kIntFields[] = {
    {"map.blacklist_threshold", [](RunConfig& c) -> int& { return c.map.blacklist_threshold; }},
    {"map.prior_validity_min", [](RunConfig& c) -> int& { return c.map.prior_validity_min; }},
    {"map.threads", [](RunConfig& c) -> int& { return c.map.threads; }},
    {"map.epipolar.max_steps", [](RunConfig& c) -> int& { return c.map.epipolar.max_steps; }},
    {"map.filter.radius", [](RunConfig& c) -> int& { return c.map.filter.radius; }},
    {"map.filter.min_valid_neighbours", [](RunConfig& c) -> int& { return c.map.filter.min_valid_neighbours; }},
    {"pipeline.slow_rate", [](RunConfig& c) -> int& { return c.pipeline.slow_rate; }},
    {"pipeline.scan_cost", [](RunConfig& c) -> int& { return c.pipeline.scan_cost; }},
    {"pipeline.skip_cost", [](RunConfig& c) -> int& { return c.pipeline.skip_cost; }},
    {"pipeline.init_cost", [](RunConfig& c) -> int& { return c.pipeline.init_cost; }},
    {"pipeline.fifo_depth", [](RunConfig& c) -> int& { return c.pipeline.fifo_depth; }},
    {"pipeline.mem_bandwidth", [](RunConfig& c) -> int& { return c.pipeline.mem_bandwidth; }},
    {"pipeline.parallelism", [](RunConfig& c) -> int& { return c.pipeline.parallelism; }},
    {"keyframe_interval", [](RunConfig& c) -> int& { return c.keyframe_interval; }},
};

constexpr Field<bool> kBoolFields[] = {
    {"map.enable_hole_fill", [](RunConfig& c) -> bool& { return c.map.enable_hole_fill; }},
    {"map.enable_smooth", [](RunConfig& c) -> bool& { return c.map.enable_smooth; }},
};

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer value for " + key + ": '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + value + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        " is not 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    bool handled = false;
    for (const auto& f : kDoubleFields)
      if (key == f.key) {
        f.ref(config) = parse_double(key, value);
        handled = true;
        break;
      }
    if (!handled)
      for (const auto& f : kIntFields)
        if (key == f.key) {
          f.ref(config) = parse_int(key, value);
          handled = true;
          break;
        }
    if (!handled)
      for (const auto& f : kBoolFields)
        if (key == f.key) {
          f.ref(config) = parse_bool(key, value);
          handled = true;
          break;
        }
    if (!handled) throw ConfigError("unknown configuration key: " + key);
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& config) {
  RunConfig c = config;  // the field table hands out mutable references
  std::ostringstream out;
  out.precision(15);
  for (const auto& f : kDoubleFields) out << f.key << " = " << f.ref(c) << "\n";
  for (const auto& f : kIntFields) out << f.key << " = " << f.ref(c) << "\n";
  for (const auto& f : kBoolFields)
    out << f.key << " = " << (f.ref(c) ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace sdm
