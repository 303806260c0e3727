#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pexp/errors.hpp"

namespace pexp {

// Flat key = value text format with [section] headers. Sections may repeat
// (one [sector] block per sector, one [region] block per region); '#' or ';'
// starts a comment. Values are trimmed; lists are comma separated.
struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long_or(const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key) const;

    // Schema check: every present key must be in `allowed`, else an error
    // naming the key and section.
    void restrict_keys(const std::vector<std::string>& allowed) const;
};

struct ConfigFile {
    std::vector<ConfigSection> sections;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin);

    const ConfigSection* find(const std::string& name) const;
    const ConfigSection& require(const std::string& name) const;
    std::vector<const ConfigSection*> all(const std::string& name) const;
    void restrict_sections(const std::vector<std::string>& allowed) const;
};

}  // namespace pexp
