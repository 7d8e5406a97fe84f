#pragma once

#include <map>
#include <string>
#include <vector>

namespace topopt {

// Flat key = value run configuration. Values are kept as strings and doubles
// are formatted round-trip exactly, so a resolved file reruns identically.
// Lines starting with '#' and blank lines are ignored.
class Config {
public:
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, int value);
    void set_bool(const std::string& key, bool value);

    // Copies every entry of `overrides` over this one.
    void merge(const Config& overrides);

    std::vector<std::string> keys() const;

    static Config parse(const std::string& text);
    static Config load(const std::string& path);
    std::string format() const;

private:
    const std::string& fetch(const std::string& key) const;

    std::map<std::string, std::string> values_;
};

} // namespace topopt
