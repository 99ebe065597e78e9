#include "stormfx/csv.hpp"

#include "stormfx/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stormfx {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::DataGap: return "data_gap";
    case ErrorKind::DegenerateKnots: return "degenerate_knots";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::Diagnostic: return "diagnostic";
    case ErrorKind::NotConverged: return "not_converged";
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

namespace {

std::vector<std::string> split_record(std::string_view line, const std::string& source,
                                      std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        fail(ErrorKind::InvalidInput,
             source + ":" + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        index_.emplace(header_[i], i);
    }
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
    return parse(read_text(path), path.string());
}

CsvTable CsvTable::parse(std::string_view text, const std::string& source) {
    CsvTable table;
    table.source_ = source;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto fields = split_record(line, source, line_no);
        if (!have_header) {
            table = CsvTable(std::move(fields));
            table.source_ = source;
            have_header = true;
            continue;
        }
        if (fields.size() != table.header_.size()) {
            fail(ErrorKind::InvalidInput, source + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(table.header_.size()) +
                                              " fields, found " + std::to_string(fields.size()));
        }
        table.rows_.push_back(std::move(fields));
        if (end == text.size()) break;
    }
    if (!have_header) {
        fail(ErrorKind::InvalidInput, source + ": missing header row");
    }
    return table;
}

bool CsvTable::has_column(const std::string& name) const { return index_.contains(name); }

std::size_t CsvTable::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        fail(ErrorKind::InvalidInput, source_ + ": missing column '" + name + "'");
    }
    return it->second;
}

const std::string& CsvTable::at(std::size_t row, const std::string& name) const {
    return rows_.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    return parse_double(at(row, name), source_ + " row " + std::to_string(row + 2) + " " + name);
}

long long CsvTable::integer(std::size_t row, const std::string& name) const {
    return parse_integer(at(row, name), source_ + " row " + std::to_string(row + 2) + " " + name);
}

std::optional<double> CsvTable::optional_number(std::size_t row, const std::string& name) const {
    if (!has_column(name)) return std::nullopt;
    const auto& field = at(row, name);
    if (field.empty() || field == "NA") return std::nullopt;
    return number(row, name);
}

void CsvTable::add_row(std::vector<std::string> fields) {
    require(fields.size() == header_.size(), "CSV row width does not match header");
    rows_.push_back(std::move(fields));
}

std::string CsvTable::to_string() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out.push_back(',');
            out += quote_if_needed(fields[i]);
        }
        out.push_back('\n');
    };
    emit(header_);
    for (const auto& row : rows_) emit(row);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, to_string()); }

std::string format_double(double value) {
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text == "NA") return std::nan("");
    if (text == "Inf") return INFINITY;
    if (text == "-Inf") return -INFINITY;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        fail(ErrorKind::InvalidInput, context + ": not a number: '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text, const std::string& context) {
    long long value = 0;
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        fail(ErrorKind::InvalidInput, context + ": not an integer: '" + std::string(text) + "'");
    }
    return value;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
    out << contents;
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace stormfx
