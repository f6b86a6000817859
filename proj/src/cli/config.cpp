#include "qdent/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qdent/errors.hpp"

namespace qdent::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto* begin = t.data();
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || t.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a number", where, text));
    return value;
}

std::size_t to_size(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", where, text));
    return value;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace

const ScenarioConfig::Schema& ScenarioConfig::schema() {
    static const Schema schema{
        {"chain", {"n_sites", "v_f_mev", "n_sites_min", "n_sites_max", "dt_ps"}},
        {"drive",
         {"omega_ratios", "omegas_mev", "detuning_mev", "envelope", "sigma_ps", "t_max_pi", "dt_ps", "dt_max_ps"}},
        {"blocking", {"n_sites_list", "ratios", "inset_ratio", "dt_ps", "t_max_ps"}},
        {"protocol",
         {"bus_length_a", "bus_length_b", "shift_ratio", "gamma_per_ps", "ideal_controls", "explicit_blocking",
          "strict_timing", "reblock_tolerance_ps", "bell_shift_mev", "bell_omega_a_mev", "bell_omega_b_mev",
          "control_omega_ratio", "swap_fidelity"}},
        {"output", {"plots", "trajectories"}},
    };
    return schema;
}

ScenarioConfig ScenarioConfig::parse(std::istream& in, const std::string& source) {
    ScenarioConfig config;
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string where = fmt::format("{}:{}", source, number);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(fmt::format("{}: malformed section header", where));
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().contains(section)) throw ConfigError(fmt::format("{}: unknown section [{}]", where, section));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("{}: expected key = value", where));
        if (section.empty()) throw ConfigError(fmt::format("{}: key outside of any section", where));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!schema().at(section).contains(key))
            throw ConfigError(fmt::format("{}: unknown key '{}' in [{}]", where, key, section));
        if (value.empty()) throw ConfigError(fmt::format("{}: key '{}' has no value", where, key));
        auto& entries = config.values_[section];
        if (entries.contains(key)) throw ConfigError(fmt::format("{}: duplicate key '{}'", where, key));
        entries[key] = value;
    }
    return config;
}

ScenarioConfig ScenarioConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    return parse(in, path.string());
}

bool ScenarioConfig::has(const std::string& section, const std::string& key) const {
    return raw(section, key).has_value();
}

std::optional<std::string> ScenarioConfig::raw(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

double ScenarioConfig::get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto value = raw(section, key);
    return value ? to_double(*value, fmt::format("[{}] {}", section, key)) : fallback;
}

std::size_t ScenarioConfig::get_size(const std::string& section, const std::string& key,
                                     std::size_t fallback) const {
    const auto value = raw(section, key);
    return value ? to_size(*value, fmt::format("[{}] {}", section, key)) : fallback;
}

bool ScenarioConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    if (*value == "true" || *value == "1" || *value == "yes") return true;
    if (*value == "false" || *value == "0" || *value == "no") return false;
    throw ConfigError(fmt::format("[{}] {}: '{}' is not a boolean", section, key, *value));
}

std::string ScenarioConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
}

std::vector<double> ScenarioConfig::get_doubles(const std::string& section, const std::string& key,
                                                const std::vector<double>& fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*value)) out.push_back(to_double(item, fmt::format("[{}] {}", section, key)));
    if (out.empty()) throw ConfigError(fmt::format("[{}] {}: empty list", section, key));
    return out;
}

std::vector<std::size_t> ScenarioConfig::get_sizes(const std::string& section, const std::string& key,
                                                   const std::vector<std::size_t>& fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    std::vector<std::size_t> out;
    for (const auto& item : split_list(*value)) out.push_back(to_size(item, fmt::format("[{}] {}", section, key)));
    if (out.empty()) throw ConfigError(fmt::format("[{}] {}: empty list", section, key));
    return out;
}

}  // namespace qdent::cli
