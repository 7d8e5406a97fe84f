#include "topopt/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace topopt {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

const std::string& Config::fetch(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::out_of_range("config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return fetch(key); }

double Config::get_double(const std::string& key) const {
    const std::string& v = fetch(key);
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config: key '" + key + "' is not a number: '" + v + "'");
    return x;
}

int Config::get_int(const std::string& key) const {
    const std::string& v = fetch(key);
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config: key '" + key + "' is not an integer: '" + v + "'");
    return static_cast<int>(x);
}

bool Config::get_bool(const std::string& key) const {
    std::string v = fetch(key);
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::invalid_argument("config: key '" + key + "' is not a boolean: '" + v + "'");
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::set_double(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    values_[key] = buf;
}

void Config::set_int(const std::string& key, int value) { values_[key] = std::to_string(value); }

void Config::set_bool(const std::string& key, bool value) { values_[key] = value ? "true" : "false"; }

void Config::merge(const Config& overrides) {
    for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " has no '=': '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: line " + std::to_string(lineno) + " has no key");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::format() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
}

} // namespace topopt
