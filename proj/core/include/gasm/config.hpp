#pragma once

#include <map>
#include <string>
#include <vector>

namespace gasm {

// Minimal INI: [section] headers, key = value lines, '#' or ';' comments,
// whitespace-trimmed. Later assignments win, which is how command-line
// overrides are layered on top of a file.
class Ini {
public:
    static Ini parse_file(const std::string& path);
    static Ini parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    long get_int(const std::string& section, const std::string& key,
                 long fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;

    void set(const std::string& section, const std::string& key,
             const std::string& value);

    std::vector<std::string> sections() const;
    const std::map<std::string, std::string>& section(const std::string& name) const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace gasm
