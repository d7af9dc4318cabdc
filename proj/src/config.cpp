#include "ddes/config.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ddes {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ';' || s[i] == '#') return s.substr(0, i);
    }
    return s;
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            if (cfg.sections_.count(section))
                throw ConfigError("config line " + std::to_string(lineno) + ": duplicate section [" +
                                  section + "]");
            cfg.sections_[section] = {};
            cfg.order_.push_back(section);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        auto& sec = cfg.sections_[section];
        if (sec.count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "' in [" + section + "]");
        sec[key] = value;
        cfg.key_order_[section].push_back(key);
    }
    return cfg;
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::require_string(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end())
        throw ConfigError("missing required key '" + key + "' in [" + section +
                          "] (section not present)");
    auto kit = it->second.find(key);
    if (kit == it->second.end())
        throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    return kit->second;
}

double ConfigFile::require_double(const std::string& section, const std::string& key) const {
    const std::string v = require_string(section, key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || trim(end) != "")
        throw ConfigError("key '" + key + "' in [" + section + "] is not a number: " + v);
    return x;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? sections_.at(section).at(key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? require_double(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
    if (!has(section, key)) return fallback;
    const double x = require_double(section, key);
    const long long i = static_cast<long long>(x);
    if (static_cast<double>(i) != x)
        throw ConfigError("key '" + key + "' in [" + section + "] must be an integer");
    return i;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = sections_.at(section).at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "' in [" + section + "] must be a boolean");
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    if (!sections_.count(section)) order_.push_back(section);
    auto& sec = sections_[section];
    if (!sec.count(key)) key_order_[section].push_back(key);
    sec[key] = value;
}

void ConfigFile::set_path(const std::string& path, const std::string& value) {
    const std::size_t dot = path.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        throw ConfigError("parameter path must look like section.key: " + path);
    set(path.substr(0, dot), path.substr(dot + 1), value);
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    auto it = key_order_.find(section);
    return it == key_order_.end() ? std::vector<std::string>{} : it->second;
}

std::string ConfigFile::serialize() const {
    std::ostringstream os;
    for (const std::string& sec : order_) {
        os << "[" << sec << "]\n";
        auto ko = key_order_.find(sec);
        if (ko != key_order_.end()) {
            for (const std::string& k : ko->second)
                os << k << " = " << sections_.at(sec).at(k) << "\n";
        }
        os << "\n";
    }
    return os.str();
}

} // namespace ddes
