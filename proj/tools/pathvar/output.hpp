#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace pathvar::cli {

using Json = nlohmann::ordered_json;

/// Shortest decimal text with 17 significant digits ("%.17g").
[[nodiscard]] std::string format_double(double x);

/// Serializes with fixed key order and 17-digit floats; non-finite numbers become null.
[[nodiscard]] std::string dump_json(const Json& value);
void write_json(const Json& value, const std::filesystem::path& file);

class CsvTable {
public:
    using Cell = std::variant<double, std::int64_t, std::string>;

    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<Cell> row);
    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }
    [[nodiscard]] std::string str() const;
    void write(const std::filesystem::path& file) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace pathvar::cli
