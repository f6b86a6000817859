#pragma once

// Flat sectioned `key = value` scenario files:
//
//   # comment
//   [chain]
//   v_f_mev = 0.2
//   [blocking]
//   ratios = 0, 2, 5, 10, 20, 40
//
// Unknown sections and keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qdent::cli {

class ScenarioConfig {
public:
    using Schema = std::map<std::string, std::set<std::string>>;

    /// Sections and keys understood by the tool.
    static const Schema& schema();

    static ScenarioConfig parse(std::istream& in, const std::string& source = "<config>");
    static ScenarioConfig parse_string(const std::string& text);
    static ScenarioConfig load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> raw(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& section, const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                       const std::vector<std::size_t>& fallback) const;

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace qdent::cli
