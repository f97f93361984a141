#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace genshift {

/// Declared type and range of a configuration value.
struct ConfigKey {
    enum class Type { real, positive_real, nonnegative_real, integer, positive_integer, text, choice, flag };

    std::string name;
    Type type = Type::text;
    std::vector<std::string> choices;  ///< for Type::choice
};

/// Flat `key = value` settings mirroring CLI flags.
///
/// Blank lines and lines starting with '#' are ignored. Unknown keys,
/// duplicates and values that do not parse to their declared type and range
/// are rejected with ParseError carrying the line number.
class RunConfig {
public:
    static RunConfig parse(std::string_view text, const std::vector<ConfigKey>& schema);
    static RunConfig load(const std::filesystem::path& path, const std::vector<ConfigKey>& schema);

    bool contains(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    double get_real(std::string_view key, double fallback) const;
    long long get_integer(std::string_view key, long long fallback) const;

    /// Entries in file order.
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_string() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace genshift
