#pragma once

// Command-line front end: the flat key=value config format with `block { }`
// nesting, and the norm / apconst / opnorm / sweep / verify / report / pin
// commands.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amalgam/error.hpp"
#include "amalgam/grid.hpp"

namespace amalgam {

/// Malformed config text; the message carries source and line.
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& source, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Keys inside blocks are stored as `block.key`. Entries are separated by
/// newlines, whitespace or commas; a comma or blank only separates when it is
/// followed by `identifier=`, so values such as `indicator:0,1` stay whole.
class Config {
public:
    struct Entry {
        std::string value;
        std::string source;
        int line = 0;
    };

    static Config parse(std::string_view text, const std::string& source = "config", const std::string& prefix = "");

    /// Later entries override earlier ones.
    void merge(const Config& other);
    void set(const std::string& key, std::string value, std::string source = "argument", int line = 0);

    bool has(const std::string& key) const;
    /// First present key among `keys`.
    std::optional<std::string> find(std::initializer_list<std::string> keys) const;
    std::string text(std::initializer_list<std::string> keys, const std::string& fallback) const;
    std::string require(std::initializer_list<std::string> keys) const;
    /// Numbers accept `inf` / `infinity`.
    double number(std::initializer_list<std::string> keys, double fallback) const;
    double require_number(std::initializer_list<std::string> keys) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::optional<std::pair<std::string, Entry>> lookup(std::initializer_list<std::string> keys) const;
    std::map<std::string, Entry> entries_;
};

/// `dim`, `L`, `N` from the `grid` block; defaults dim = 1, L = 4, N = 1024.
Grid grid_from_config(const Config& config);

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_usage = 2, exit_numeric = 3 };

/// Runs one command. Reports go to `out` (or to --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amalgam
