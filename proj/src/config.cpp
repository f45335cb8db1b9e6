#include "tcode/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tcode/errors.hpp"

namespace tcode {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "not a number: `" + value + "`");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "not an integer: `" + value + "`");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(key, "out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "not an unsigned integer: `" + value + "`");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key, "expected true or false, got `" + value + "`");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"topology",
       {
           {"rows", [](auto& c, auto& k, auto& v) { c.topology.rows = to_int(k, v); }},
           {"cols", [](auto& c, auto& k, auto& v) { c.topology.cols = to_int(k, v); }},
           {"removal_fraction",
            [](auto& c, auto& k, auto& v) { c.topology.removal_fraction = to_double(k, v); }},
           {"file", [](auto& c, auto&, auto& v) { c.topology.file = v; }},
           {"routing",
            [](auto& c, auto& k, auto& v) {
              const auto kind = parse_routing_kind(v);
              if (!kind) {
                throw ConfigError(k, "expected uniform, no-backtrack or shortest-path, got `" +
                                         v + "`");
              }
              c.routing = *kind;
            }},
           {"ttl", [](auto& c, auto& k, auto& v) { c.ttl = to_int(k, v); }},
           {"service_mean_s", [](auto& c, auto& k, auto& v) { c.service_mean = to_double(k, v); }},
       }},
      {"link",
       {
           {"capacity_bps",
            [](auto& c, auto& k, auto& v) { c.link.capacity_bps = to_double(k, v); }},
           {"mean_delay_s",
            [](auto& c, auto& k, auto& v) { c.link.mean_delay_s = to_double(k, v); }},
       }},
      {"traffic",
       {
           {"rate", [](auto& c, auto& k, auto& v) { c.rates = {to_double(k, v)}; }},
           {"rates",
            [](auto& c, auto& k, auto& v) {
              c.rates.clear();
              for (const auto& item : split_list(v)) c.rates.push_back(to_double(k, item));
            }},
           {"packet_size_bits",
            [](auto& c, auto& k, auto& v) { c.packet_size_bits = to_double(k, v); }},
       }},
      {"code",
       {
           {"k", [](auto& c, auto& k, auto& v) { c.k = to_int(k, v); }},
           {"n", [](auto& c, auto& k, auto& v) { c.n = to_int(k, v); }},
           {"n_values",
            [](auto& c, auto& k, auto& v) {
              c.n_values.clear();
              for (const auto& item : split_list(v)) c.n_values.push_back(to_int(k, item));
            }},
       }},
      {"run",
       {
           {"deadline_s", [](auto& c, auto& k, auto& v) { c.deadline = to_double(k, v); }},
           {"horizon_s", [](auto& c, auto& k, auto& v) { c.horizon = to_double(k, v); }},
           {"warmup_fraction",
            [](auto& c, auto& k, auto& v) { c.warmup_fraction = to_double(k, v); }},
           {"replications", [](auto& c, auto& k, auto& v) { c.replications = to_int(k, v); }},
           {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
           {"queue_threshold",
            [](auto& c, auto& k, auto& v) { c.queue_threshold = to_double(k, v); }},
           {"record_messages",
            [](auto& c, auto& k, auto& v) { c.record_messages = to_bool(k, v); }},
       }},
  };
  return table;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  config.rates.clear();
  std::set<std::string> seen;
  std::string section;
  bool n_given = false;
  bool rate_given = false;
  bool rates_given = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "malformed section header" + where);
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) {
        throw ConfigError(section, "unknown section" + where);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", "expected `key = value`" + where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", "missing key" + where);
    if (section.empty()) throw ConfigError(key, "key outside any section" + where);

    const auto& keys = schema().at(section);
    const auto setter = keys.find(key);
    if (setter == keys.end()) throw ConfigError(key, "unknown key in [" + section + "]" + where);
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key" + where);
    if (value.empty()) throw ConfigError(key, "missing value" + where);
    setter->second(config, key, value);

    n_given |= key == "n";
    rate_given |= key == "rate";
    rates_given |= key == "rates";
  }
  if (!seen.count("k")) throw ConfigError("k", "required");
  if (!n_given) config.n = config.k;
  if (rate_given && rates_given) throw ConfigError("rates", "give either rate or rates, not both");
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[topology]\n";
  if (c.topology.file.empty()) {
    out << "rows = " << c.topology.rows << '\n'
        << "cols = " << c.topology.cols << '\n'
        << "removal_fraction = " << num(c.topology.removal_fraction) << '\n';
  } else {
    out << "file = " << c.topology.file << '\n';
  }
  out << "routing = " << to_string(c.routing) << '\n'
      << "ttl = " << c.ttl << '\n'
      << "service_mean_s = " << num(c.service_mean) << '\n';
  out << "\n[link]\n"
      << "capacity_bps = " << num(c.link.capacity_bps) << '\n'
      << "mean_delay_s = " << num(c.link.mean_delay_s) << '\n';
  out << "\n[traffic]\n";
  if (!c.rates.empty()) {
    out << "rates = ";
    for (std::size_t i = 0; i < c.rates.size(); ++i) out << (i ? ", " : "") << num(c.rates[i]);
    out << '\n';
  }
  out << "packet_size_bits = " << num(c.packet_size_bits) << '\n';
  out << "\n[code]\n" << "k = " << c.k << '\n' << "n = " << c.n << '\n';
  if (!c.n_values.empty()) {
    out << "n_values = ";
    for (std::size_t i = 0; i < c.n_values.size(); ++i) out << (i ? ", " : "") << c.n_values[i];
    out << '\n';
  }
  out << "\n[run]\n"
      << "deadline_s = " << num(c.deadline) << '\n'
      << "horizon_s = " << num(c.horizon) << '\n'
      << "warmup_fraction = " << num(c.warmup_fraction) << '\n'
      << "replications = " << c.replications << '\n'
      << "seed = " << c.seed << '\n'
      << "queue_threshold = " << num(c.queue_threshold) << '\n'
      << "record_messages = " << (c.record_messages ? "true" : "false") << '\n';
  return out.str();
}

std::string config_reference() {
  return R"(Config file: `key = value` lines under [section] headers; `#` comments.
  [topology] rows = 4, cols = 4, removal_fraction = 0.2, file = <path> (overrides the grid),
             routing = no-backtrack | uniform | shortest-path, ttl = 0 (0: 8 x diameter),
             service_mean_s = 0.0001
  [link]     capacity_bps = 1e7, mean_delay_s = 0.002
  [traffic]  rate = <msgs/s> or rates = <r1, r2, ...>, packet_size_bits = 1000
  [code]     k (required), n = k, n_values = <n1, n2, ...> (sweep-rate)
  [run]      deadline_s = 0.3, horizon_s = 200, warmup_fraction = 0.1, replications = 5,
             seed = 1, queue_threshold = 1000, record_messages = false
)";
}

}  // namespace tcode
