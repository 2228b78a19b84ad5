#include "ergopt/io_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ergopt/errors.hpp"

namespace ergopt {

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw Error("failed to format a floating-point value");
    return std::string(buf, ptr);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw Error("failed while writing: " + path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw ConfigError("CSV header must have at least one column");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) body_ += ',';
        body_ += header[i];
    }
    body_ += '\n';
}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_)
        throw ConfigError("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

void CsvWriter::save(const std::string& path) const { write_text_file(path, body_); }

} // namespace ergopt
