#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <bkio/bench/runner.hpp>

namespace bkio::bench {

inline constexpr std::string_view csv_header = "method,codec,events,wall_ms,cpu_ms,unzip_ms,events_per_sec,bytes";

/// Header plus one row per result. Throws invalid_config when `results` is empty.
void emit_csv(std::span<const BenchResult> results, std::ostream& out);
void emit_csv(std::span<const BenchResult> results, const std::filesystem::path& path);

/// Generic table writer used by the report; quotes fields as RFC 4180 requires.
void write_csv_row(std::ostream& out, std::span<const std::string> fields);
std::string quote_csv_field(std::string_view field);

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace bkio::bench
