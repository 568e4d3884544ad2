#include "til/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace til {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void parse_error(const std::string& origin, int line, const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) parse_error(origin, lineno, "expected key=value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) parse_error(origin, lineno, "empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::runtime_error("override must be key=value, got '" + assignment + "'");
    }
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

double Config::get_double(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error(origin_ + ": missing config key '" + key + "'");
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(origin_ + ": key '" + key + "' is not a number: '" + it->second + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw std::runtime_error(origin_ + ": key '" + key + "' is not an integer");
    }
    return i;
}

int Config::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::runtime_error(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error(origin_ + ": missing config key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

std::string Config::content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : values_) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Config::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += "=";
        out += v;
        out += "\n";
    }
    return out;
}

}  // namespace til
