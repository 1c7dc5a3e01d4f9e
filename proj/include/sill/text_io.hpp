#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sill {

/// Shortest decimal string that parses back to exactly the same double.
/// Locale-independent ('.' decimal separator always).
std::string format_double(double value);

/// 64-bit FNV-1a of a byte string, as 16 hex digits. Used for config
/// provenance hashes.
std::string fnv1a_hex(const std::string& bytes);

/// RFC-4180 CSV writer: header row, CRLF line endings, UTF-8. Numeric cells
/// go through format_double.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    void write(const std::string& path) const;
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace sill
