#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace docrepair {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Sampling temperature held as integer tenths so schedules are exactly
/// reproducible (0.0, 0.1, ..., 0.9 never drift).
class Temperature {
public:
    constexpr Temperature() = default;
    constexpr explicit Temperature(int tenths) : tenths_(tenths) {}

    static Temperature from_double(double value);

    constexpr int tenths() const { return tenths_; }
    constexpr double value() const { return tenths_ / 10.0; }
    std::string str() const;

    constexpr auto operator<=>(const Temperature&) const = default;

private:
    int tenths_ = 0;
};

std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a, used where a fast stable (non-cryptographic) hash is enough.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits into lines keeping each terminator; the last element lacks '\n'
/// when the input does not end with one. Concatenation gives back the input.
std::vector<std::string_view> split_lines_keep(std::string_view text);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Rough token estimate used for accounting when a provider reports no usage.
std::int64_t estimate_tokens(std::string_view text);

}  // namespace docrepair
