#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace eecmdp {

// One `key = value` line of a config file.
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
};

// Sectioned flat config. Consumers mark the entries they understand;
// anything left over is an unknown key and rejected at the end, so a
// typo never passes silently.
class ConfigFile {
  public:
    static ConfigFile read(std::istream& in, const std::string& origin);
    static ConfigFile read_file(const std::string& path);

    const ConfigEntry* find(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;
    const std::string& origin() const { return origin_; }

    // Typed lookups; consume the entry and throw ConfigError on a parse
    // failure (message carries file:line and the key).
    bool get_double(const std::string& section, const std::string& key, double& out) const;
    bool get_int(const std::string& section, const std::string& key, long long& out) const;
    bool get_uint64(const std::string& section, const std::string& key, std::uint64_t& out) const;
    bool get_bool(const std::string& section, const std::string& key, bool& out) const;
    bool get_string(const std::string& section, const std::string& key, std::string& out) const;

    std::vector<const ConfigEntry*> section_entries(const std::string& section) const;

    // Throws ConfigError listing every entry no consumer claimed.
    void reject_unconsumed() const;

  private:
    std::string origin_;
    std::map<std::string, std::vector<ConfigEntry>> sections_;
};

} // namespace eecmdp
