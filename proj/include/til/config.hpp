#ifndef TIL_CONFIG_HPP
#define TIL_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace til {

// Flat key/value configuration, namespaced keys ("vehicle.total_mass=1612").
// Lines starting with '#' and blank lines are ignored. Later assignments win,
// which is how command-line overrides and tuning overlays are layered on top
// of a scenario file.
class Config {
  public:
    Config() = default;

    // Parse errors carry the file name and line number.
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<string>");

    void set(const std::string& key, const std::string& value);
    void merge(const Config& other);

    // "key=value" as accepted by --override.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    // FNV-1a over the sorted key=value pairs; lets reports prove two runs
    // shared one configuration.
    std::string content_hash() const;

    std::string to_text() const;

  private:
    std::map<std::string, std::string> values_;
    std::string origin_ = "<empty>";
};

}  // namespace til

#endif
