#include "eecmdp/config.hpp"

#include "eecmdp/errors.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace eecmdp {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

} // namespace

ConfigFile ConfigFile::read(std::istream& in, const std::string& origin) {
    ConfigFile cf;
    cf.origin_ = origin;
    std::string line;
    std::string section; // entries before any header land in ""
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (auto cmt = t.find_first_of("#;"); cmt != std::string::npos)
            t = trim(t.substr(0, cmt));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                fail(origin, lineno, "malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            cf.sections_[section]; // section may stay empty
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(origin, lineno, "expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(origin, lineno, "empty key");
        for (const auto& e : cf.sections_[section])
            if (e.key == key)
                fail(origin, lineno, "duplicate key '" + key + "' in section [" + section + "]");
        cf.sections_[section].push_back(ConfigEntry{key, value, lineno, false});
    }
    return cf;
}

ConfigFile ConfigFile::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return read(in, path);
}

const ConfigEntry* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    for (const auto& e : it->second)
        if (e.key == key) return &e;
    return nullptr;
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections_.count(section) != 0;
}

std::vector<const ConfigEntry*> ConfigFile::section_entries(const std::string& section) const {
    std::vector<const ConfigEntry*> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& e : it->second) out.push_back(&e);
    return out;
}

bool ConfigFile::get_double(const std::string& section, const std::string& key, double& out) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return false;
    e->consumed = true;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last)
        fail(origin_, e->line, "value of '" + key + "' is not a number: '" + e->value + "'");
    return true;
}

bool ConfigFile::get_int(const std::string& section, const std::string& key, long long& out) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return false;
    e->consumed = true;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last)
        fail(origin_, e->line, "value of '" + key + "' is not an integer: '" + e->value + "'");
    return true;
}

bool ConfigFile::get_uint64(const std::string& section, const std::string& key, std::uint64_t& out) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return false;
    e->consumed = true;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last)
        fail(origin_, e->line, "value of '" + key + "' is not an unsigned integer: '" + e->value + "'");
    return true;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool& out) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return false;
    e->consumed = true;
    if (e->value == "true" || e->value == "1" || e->value == "yes") {
        out = true;
    } else if (e->value == "false" || e->value == "0" || e->value == "no") {
        out = false;
    } else {
        fail(origin_, e->line, "value of '" + key + "' is not a boolean: '" + e->value + "'");
    }
    return true;
}

bool ConfigFile::get_string(const std::string& section, const std::string& key, std::string& out) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return false;
    e->consumed = true;
    out = e->value;
    return true;
}

void ConfigFile::reject_unconsumed() const {
    std::ostringstream os;
    bool any = false;
    for (const auto& [section, entries] : sections_) {
        for (const auto& e : entries) {
            if (e.consumed) continue;
            if (any) os << "; ";
            os << origin_ << ":" << e.line << ": unknown key '" << e.key << "' in section ["
               << section << "]";
            any = true;
        }
    }
    if (any) throw ConfigError(os.str());
}

} // namespace eecmdp
