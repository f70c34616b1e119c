#include "ribmorph/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ribmorph/error.hpp"

namespace ribmorph::csv {

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double value, int decimals)
{
    if (std::isnan(value)) {
        return "nan";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
    return std::string(buf.data(), res.ptr);
}

std::vector<std::string> split_line(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
            field.remove_suffix(1);
        }
        out.emplace_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_double(std::string_view field)
{
    if (field == "nan") {
        return std::nan("");
    }
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error(ErrorCode::SchemaViolation, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

long long parse_int(std::string_view field)
{
    long long value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error(ErrorCode::SchemaViolation, "not an integer: '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace ribmorph::csv
