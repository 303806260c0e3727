#include "pexp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pexp {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

bool ConfigSection::has(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

const std::string& ConfigSection::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw input_error("[" + name + "] is missing required key '" + key + "'");
}

std::string ConfigSection::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
    const std::string& raw = get(key);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw input_error("[" + name + "] key '" + key + "': cannot parse number '" + raw + "'");
    return value;
}

double ConfigSection::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long ConfigSection::get_long(const std::string& key) const {
    const std::string& raw = get(key);
    long value = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw input_error("[" + name + "] key '" + key + "': cannot parse integer '" + raw + "'");
    return value;
}

long ConfigSection::get_long_or(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

bool ConfigSection::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& raw = get(key);
    if (raw == "true" || raw == "yes" || raw == "1") return true;
    if (raw == "false" || raw == "no" || raw == "0") return false;
    throw input_error("[" + name + "] key '" + key + "': expected a boolean, got '" + raw + "'");
}

std::vector<double> ConfigSection::get_list(const std::string& key) const {
    std::vector<double> values;
    for (const std::string& token : get_string_list(key)) {
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw input_error("[" + name + "] key '" + key + "': cannot parse list entry '" +
                              token + "'");
        values.push_back(value);
    }
    return values;
}

std::vector<std::string> ConfigSection::get_string_list(const std::string& key) const {
    std::vector<std::string> tokens;
    std::stringstream stream(get(key));
    std::string token;
    while (std::getline(stream, token, ',')) {
        token = trim(token);
        if (!token.empty()) tokens.push_back(token);
    }
    return tokens;
}

void ConfigSection::restrict_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : entries)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw input_error("unknown key '" + k + "' in section [" + name + "]");
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw input_error(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            ConfigSection section;
            section.name = trim(line.substr(1, line.size() - 2));
            section.line = line_no;
            config.sections.push_back(std::move(section));
            current = &config.sections.back();
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw input_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
        if (!current)
            throw input_error(origin + ":" + std::to_string(line_no) +
                              ": key outside of any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw input_error(origin + ":" + std::to_string(line_no) + ": empty key");
        if (current->has(key))
            throw input_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "' in section [" + current->name + "]");
        current->entries.emplace_back(std::move(key), std::move(value));
    }
    return config;
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
    for (const auto& section : sections)
        if (section.name == name) return &section;
    return nullptr;
}

const ConfigSection& ConfigFile::require(const std::string& name) const {
    const ConfigSection* section = find(name);
    if (!section) throw input_error("config is missing required section [" + name + "]");
    return *section;
}

std::vector<const ConfigSection*> ConfigFile::all(const std::string& name) const {
    std::vector<const ConfigSection*> matches;
    for (const auto& section : sections)
        if (section.name == name) matches.push_back(&section);
    return matches;
}

void ConfigFile::restrict_sections(const std::vector<std::string>& allowed) const {
    for (const auto& section : sections)
        if (std::find(allowed.begin(), allowed.end(), section.name) == allowed.end())
            throw input_error("unknown section [" + section.name + "]");
}

}  // namespace pexp
