#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace khess_cli {

/// Bad configuration text or value; `where` is "file:line", "--set" or a flag.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& where, const std::string& what) : std::runtime_error(where + ": " + what) {}
};

/// Flat `key = value` settings with a fixed key set. Every value remembers
/// where it came from so that errors can point at it.
class Config {
public:
    struct Entry {
        std::string key, value, help, origin;
    };

    Config();

    /// `# comment` lines and blank lines are skipped.
    void load_file(const std::string& path);
    /// "key=value" as given to --set.
    void assign(const std::string& key_value, const std::string& origin);
    void set(const std::string& key, const std::string& value, const std::string& origin);
    /// Replaces the value only if it is still the default.
    void set_default(const std::string& key, const std::string& value);

    const std::string& str(const std::string& key) const;
    int integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    bool is(const std::string& key, const std::string& value) const { return str(key) == value; }

    /// Where a key's value came from, for error messages.
    std::string origin(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    /// The full key set with current values, one `key = value` per line.
    std::string dump(bool with_help) const;

private:
    const Entry& entry(const std::string& key) const;
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace khess_cli
