#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace windcast {

/// Regularly sampled wind-speed series. Timestamps are not stored per
/// sample: sample k lives at start_epoch + k * interval_s. Immutable by
/// convention once constructed, so it is safe to share across threads.
struct WindSeries {
    std::int64_t start_epoch = 0; // seconds since the Unix epoch, UTC
    std::int64_t interval_s = 600;
    std::vector<double> values;   // m/s, finite and >= 0

    std::size_t size() const { return values.size(); }
    std::int64_t timestamp_at(std::size_t k) const {
        return start_epoch + static_cast<std::int64_t>(k) * interval_s;
    }
};

/// Throws Error if the series violates its invariants (empty, bad
/// interval, negative or non-finite value).
void validate(const WindSeries& series);

enum class TimestampFormat { kEpochSeconds, kIso8601 };

struct IngestOptions {
    TimestampFormat timestamp_format = TimestampFormat::kIso8601;
    std::int64_t interval_s = 600;
    std::size_t max_gap = 6; // longest run of missing samples to interpolate
};

struct IngestReport {
    std::size_t rows_read = 0;     // data rows encountered (header excluded)
    std::size_t gaps_filled = 0;   // samples synthesized by interpolation
    std::size_t rows_rejected = 0;
    std::map<std::string, std::size_t> reject_reasons;
};

struct IngestResult {
    WindSeries series;
    IngestReport report;
};

/// Reads a wind-speed CSV onto the regular grid.
///
/// Expected layout: a header row naming columns `timestamp` and
/// `speed_ms` (extra columns are ignored), then one row per sample.
/// LF and CRLF both accepted. Rows that are malformed, out of order,
/// duplicated, or off the grid are rejected and counted per reason.
/// Gaps of at most max_gap consecutive missing samples are filled by
/// linear interpolation; longer gaps are a hard error, as is any
/// negative or non-finite speed (reported with its row number).
IngestResult parse_csv(const std::filesystem::path& path, const IngestOptions& options);

/// Re-emits a series as `epoch_s,speed_ms` rows; speeds are printed with
/// full round-trip precision, so parse -> write -> parse is lossless.
void write_csv(const WindSeries& series, const std::filesystem::path& path);

/// Contiguous sub-series of `length` samples starting at start_index.
WindSeries slice(const WindSeries& series, std::size_t start_index, std::size_t length);

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day);

/// Parses "YYYY-MM-DD HH:MM:SS" / "YYYY-MM-DDTHH:MM:SSZ" as UTC seconds
/// since the epoch. Throws Error on anything else.
std::int64_t parse_iso8601_utc(std::string_view text);

} // namespace windcast
