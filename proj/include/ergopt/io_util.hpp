#pragma once

#include <string>
#include <vector>

namespace ergopt {

// Shortest decimal representation that round-trips to the same double, so
// repeated runs emit byte-identical artifacts.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Comma-separated values with a header row and '.' decimals.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    const std::string& str() const { return body_; }
    void save(const std::string& path) const;

private:
    std::size_t columns_;
    std::string body_;
};

} // namespace ergopt
