#include "genshift/run_config.hpp"

#include "genshift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genshift {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> to_real(std::string_view text)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<long long> to_integer(std::string_view text)
{
    long long value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

void check_value(const ConfigKey& key, std::string_view value, std::size_t line)
{
    auto fail = [&](const std::string& expectation) {
        throw ParseError("'" + key.name + "' must be " + expectation + ", got '" + std::string(value) + "'", line);
    };
    using Type = ConfigKey::Type;
    switch (key.type) {
    case Type::real:
        if (!to_real(value)) fail("a finite number");
        break;
    case Type::positive_real: {
        const auto v = to_real(value);
        if (!v || *v <= 0.0) fail("a positive number");
        break;
    }
    case Type::nonnegative_real: {
        const auto v = to_real(value);
        if (!v || *v < 0.0) fail("a non-negative number");
        break;
    }
    case Type::integer:
        if (!to_integer(value)) fail("an integer");
        break;
    case Type::positive_integer: {
        const auto v = to_integer(value);
        if (!v || *v < 1) fail("a positive integer");
        break;
    }
    case Type::text:
        if (value.empty()) fail("non-empty");
        break;
    case Type::choice:
        if (std::find(key.choices.begin(), key.choices.end(), value) == key.choices.end()) {
            std::string list;
            for (const auto& c : key.choices) list += (list.empty() ? "" : "|") + c;
            fail("one of " + list);
        }
        break;
    case Type::flag:
        if (value != "true" && value != "false" && value != "1" && value != "0" && value != "yes" && value != "no") {
            fail("true or false");
        }
        break;
    }
}

} // namespace

RunConfig RunConfig::parse(std::string_view text, const std::vector<ConfigKey>& schema)
{
    RunConfig config;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (!line.empty() && line.front() != '#') {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            const auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigKey& k) { return k.name == key; });
            if (it == schema.end()) throw ParseError("unknown key '" + key + "'", line_no);
            if (config.contains(key)) throw ParseError("duplicate key '" + key + "'", line_no);
            check_value(*it, value, line_no);
            config.entries_.emplace_back(key, value);
        }
        if (end == text.size()) break;
    }
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::vector<ConfigKey>& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), schema);
}

bool RunConfig::contains(std::string_view key) const { return get(key).has_value(); }

std::optional<std::string> RunConfig::get(std::string_view key) const
{
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

double RunConfig::get_real(std::string_view key, double fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    const auto parsed = to_real(*v);
    if (!parsed) throw ParseError("'" + std::string(key) + "' is not a number");
    return *parsed;
}

long long RunConfig::get_integer(std::string_view key, long long fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    const auto parsed = to_integer(*v);
    if (!parsed) throw ParseError("'" + std::string(key) + "' is not an integer");
    return *parsed;
}

std::string RunConfig::to_string() const
{
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + '\n';
    return out;
}

} // namespace genshift
