#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ddes {

// Flat sectioned key-value config: [section] headers, `key = value` lines,
// comments with ';' or '#'. Section and key order is preserved; duplicate
// keys are rejected. Unknown sections/keys are rejected at scenario-build
// time against a schema, so typos never pass silently.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    std::string require_string(const std::string& section, const std::string& key) const;
    double require_double(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    // "section.key" path, used by sweep patching.
    void set_path(const std::string& path, const std::string& value);

    std::vector<std::string> section_names() const { return order_; }
    std::vector<std::string> keys(const std::string& section) const;

    std::string serialize() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::vector<std::string> order_;
    std::map<std::string, std::vector<std::string>> key_order_;
};

} // namespace ddes
