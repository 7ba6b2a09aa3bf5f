#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace multiway {

/// CSV contents with a mandatory header row. Quoted fields ("a,b", "say ""hi""")
/// are supported; embedded newlines are not.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
    std::string source;

    /// Position of a header column; throws DataError when absent.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is, const std::string& source = {});
CsvTable read_csv_file(const std::string& path);

/// RFC-4180 style quoting when the field needs it.
std::string csv_escape(const std::string& field);

}  // namespace multiway
