#include <bkio/bench/csv.hpp>

#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <bkio/error.hpp>

namespace bkio::bench {

std::string format_double(double value)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

std::string quote_csv_field(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << quote_csv_field(fields[i]);
    }
    out << '\n';
}

void emit_csv(std::span<const BenchResult> results, std::ostream& out)
{
    if (results.empty()) {
        throw Error(ErrorCode::invalid_config, "no benchmark results to write");
    }
    out << csv_header << '\n';
    for (const auto& r : results) {
        const std::string fields[] = {r.method,
                                      r.codec,
                                      std::to_string(r.events),
                                      format_double(r.wall_ms),
                                      format_double(r.cpu_ms),
                                      format_double(r.unzip_ms),
                                      format_double(r.events_per_sec),
                                      std::to_string(r.bytes)};
        write_csv_row(out, fields);
    }
}

void emit_csv(std::span<const BenchResult> results, const std::filesystem::path& path)
{
    std::ostringstream text;
    emit_csv(results, text);
    std::ofstream out(path, std::ios::binary);
    out << text.str();
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    }
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) {
        throw Error(ErrorCode::size_mismatch, "unterminated quoted CSV field");
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open " + path.string());
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(text);
}

} // namespace bkio::bench
