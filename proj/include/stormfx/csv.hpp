#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stormfx {

/// In-memory CSV table with a header row. Fields are unquoted unless they
/// contain a comma, quote or newline.
class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header);

    static CsvTable read(const std::filesystem::path& path);
    static CsvTable parse(std::string_view text, const std::string& source = "<memory>");

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    bool has_column(const std::string& name) const;
    std::size_t column(const std::string& name) const;

    const std::string& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
    const std::string& at(std::size_t row, const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    long long integer(std::size_t row, const std::string& name) const;
    std::optional<double> optional_number(std::size_t row, const std::string& name) const;

    void add_row(std::vector<std::string> fields);
    std::string to_string() const;
    void write(const std::filesystem::path& path) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trippable decimal representation.
std::string format_double(double value);

double parse_double(std::string_view text, const std::string& context);
long long parse_integer(std::string_view text, const std::string& context);

void write_text(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

} // namespace stormfx
