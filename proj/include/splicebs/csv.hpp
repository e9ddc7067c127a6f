#pragma once

#include "splicebs/error.hpp"
#include "splicebs/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace splicebs {

/**
 * Single-column series: optional `value` header, one number per line,
 * '.' decimal separator. Lines starting with '#' are comments. Blank lines
 * and unparsable values are data errors naming the 1-based line number.
 */
inline TimeSeries read_series_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!line.empty() && line.front() == '#') continue;
        std::string_view text(line);
        while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
        while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
        if (text.empty()) fail(ErrorKind::data, "line " + std::to_string(lineno) + ": blank line");
        if (header_allowed && text == "value") {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        double v = 0.0;
        const auto* first = text.data();
        if (!text.empty() && text.front() == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
            fail(ErrorKind::data,
                 "line " + std::to_string(lineno) + ": cannot parse '" + std::string(text) + "'");
        values.push_back(v);
    }
    if (values.empty()) fail(ErrorKind::data, "no observations in input");
    return TimeSeries(std::move(values));
}

inline TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::data, "cannot open '" + path + "'");
    return read_series_csv(in);
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string write_series_csv(const TimeSeries& series, const std::vector<std::string>& comments = {}) {
    std::ostringstream os;
    for (const auto& c : comments) os << "# " << c << '\n';
    os << "value\n";
    for (double v : series.values()) os << format_double(v) << '\n';
    return os.str();
}

}  // namespace splicebs
