#include "gasm/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gasm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Ini Ini::parse_string(const std::string& text) {
    Ini ini;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("unterminated section header at line " +
                                         std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            ini.data_[section];  // empty sections are legal
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("expected key = value at line " +
                                     std::to_string(lineno));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("empty key at line " + std::to_string(lineno));
        ini.data_[section][key] = value;
    }
    return ini;
}

Ini Ini::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

bool Ini::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string Ini::get(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    auto s = data_.find(section);
    if (s == data_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

long Ini::get_int(const std::string& section, const std::string& key,
                  long fallback) const {
    if (!has(section, key)) return fallback;
    return std::stol(get(section, key));
}

double Ini::get_double(const std::string& section, const std::string& key,
                       double fallback) const {
    if (!has(section, key)) return fallback;
    return std::stod(get(section, key));
}

bool Ini::get_bool(const std::string& section, const std::string& key,
                   bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw std::runtime_error("not a boolean: " + v);
}

void Ini::set(const std::string& section, const std::string& key,
              const std::string& value) {
    data_[section][key] = value;
}

std::vector<std::string> Ini::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

const std::map<std::string, std::string>& Ini::section(const std::string& name) const {
    static const std::map<std::string, std::string> empty;
    auto it = data_.find(name);
    return it == data_.end() ? empty : it->second;
}

}  // namespace gasm
