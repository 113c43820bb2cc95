#include "windcast/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "windcast/error.hpp"
#include "windcast/numio.hpp"

namespace windcast {

void validate(const WindSeries& series) {
    if (series.interval_s <= 0) throw Error("series interval must be positive");
    if (series.values.empty()) throw Error("series must hold at least one sample");
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        const double v = series.values[k];
        if (!std::isfinite(v)) throw Error("non-finite speed at sample " + std::to_string(k));
        if (v < 0.0) throw Error("negative speed at sample " + std::to_string(k));
    }
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    // Howard Hinnant's algorithm, exact over the proleptic Gregorian calendar.
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

} // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    // YYYY-MM-DD{T or space}HH:MM:SS with optional trailing 'Z'.
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    unsigned year, month, day, hour, minute, second;
    const bool ok = text.size() == 19 &&
                    parse_fixed_uint(text, 0, 4, year) && text[4] == '-' &&
                    parse_fixed_uint(text, 5, 2, month) && text[7] == '-' &&
                    parse_fixed_uint(text, 8, 2, day) &&
                    (text[10] == 'T' || text[10] == ' ') &&
                    parse_fixed_uint(text, 11, 2, hour) && text[13] == ':' &&
                    parse_fixed_uint(text, 14, 2, minute) && text[16] == ':' &&
                    parse_fixed_uint(text, 17, 2, second);
    if (!ok || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
        minute > 59 || second > 60) {
        throw Error("unparseable ISO-8601 timestamp: \"" + std::string(text) + "\"");
    }
    return days_from_civil(year, month, day) * 86400 +
           hour * 3600 + minute * 60 + second;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

IngestResult parse_csv(const std::filesystem::path& path, const IngestOptions& options) {
    if (options.interval_s <= 0) throw Error("ingest interval_s must be positive");
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error("empty input file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t ts_col = std::string::npos;
    std::size_t speed_col = std::string::npos;
    {
        const auto header = split_csv_line(line);
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto name = trim(header[i]);
            if (name == "timestamp") ts_col = i;
            else if (name == "speed_ms") speed_col = i;
        }
    }
    if (ts_col == std::string::npos || speed_col == std::string::npos)
        throw Error("header must name columns `timestamp` and `speed_ms`: " + path.string());
    const std::size_t min_cols = std::max(ts_col, speed_col) + 1;

    IngestResult result;
    WindSeries& series = result.series;
    IngestReport& report = result.report;
    series.interval_s = options.interval_s;

    const auto reject = [&report](const char* reason) {
        ++report.rows_rejected;
        ++report.reject_reasons[reason];
    };

    bool have_first = false;
    std::int64_t last_epoch = 0;
    std::size_t line_no = 1; // header was line 1
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue; // blank lines (e.g. trailing newline) are not rows

        ++report.rows_read;
        const auto fields = split_csv_line(line);
        if (fields.size() < min_cols) {
            reject("malformed row");
            continue;
        }

        std::int64_t epoch = 0;
        const auto ts_text = trim(fields[ts_col]);
        if (options.timestamp_format == TimestampFormat::kEpochSeconds) {
            if (!parse_int64(ts_text, epoch)) {
                reject("unparseable timestamp");
                continue;
            }
        } else {
            try {
                epoch = parse_iso8601_utc(ts_text);
            } catch (const Error&) {
                reject("unparseable timestamp");
                continue;
            }
        }

        double speed = 0.0;
        if (!parse_double(trim(fields[speed_col]), speed)) {
            reject("malformed row");
            continue;
        }
        // Bad speeds are sensor faults, not noise: fail loudly rather than
        // silently clamp or drop.
        if (!std::isfinite(speed))
            throw Error("non-finite speed at line " + std::to_string(line_no));
        if (speed < 0.0)
            throw Error("negative speed " + format_double(speed) + " at line " +
                        std::to_string(line_no));

        if (!have_first) {
            series.start_epoch = epoch;
            series.values.push_back(speed);
            last_epoch = epoch;
            have_first = true;
            continue;
        }

        if (epoch == last_epoch) {
            reject("duplicate timestamp");
            continue;
        }
        if (epoch < last_epoch) {
            reject("out of order");
            continue;
        }
        if ((epoch - series.start_epoch) % options.interval_s != 0) {
            reject("off-grid timestamp");
            continue;
        }

        const std::int64_t steps = (epoch - last_epoch) / options.interval_s;
        const std::size_t missing = static_cast<std::size_t>(steps - 1);
        if (missing > 0) {
            if (missing > options.max_gap)
                throw Error("gap of " + std::to_string(missing) +
                            " missing samples before line " + std::to_string(line_no) +
                            " exceeds max_gap " + std::to_string(options.max_gap));
            const double prev = series.values.back();
            for (std::size_t g = 1; g <= missing; ++g) {
                const double frac = static_cast<double>(g) / static_cast<double>(steps);
                series.values.push_back(prev + (speed - prev) * frac);
            }
            report.gaps_filled += missing;
        }
        series.values.push_back(speed);
        last_epoch = epoch;
    }

    if (series.values.empty()) throw Error("no valid rows in " + path.string());
    validate(series);
    return result;
}

void write_csv(const WindSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path.string());
    out << "epoch_s,speed_ms\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        out << series.timestamp_at(k) << ',' << format_double(series.values[k]) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

WindSeries slice(const WindSeries& series, std::size_t start_index, std::size_t length) {
    if (length == 0) throw Error("slice length must be at least 1");
    if (start_index > series.size() || length > series.size() - start_index)
        throw Error("slice [" + std::to_string(start_index) + ", " +
                    std::to_string(start_index + length) + ") out of range for series of " +
                    std::to_string(series.size()) + " samples");
    WindSeries out;
    out.start_epoch = series.timestamp_at(start_index);
    out.interval_s = series.interval_s;
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start_index),
                      series.values.begin() + static_cast<std::ptrdiff_t>(start_index + length));
    return out;
}

} // namespace windcast
