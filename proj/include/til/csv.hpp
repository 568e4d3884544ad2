#ifndef TIL_CSV_HPP
#define TIL_CSV_HPP

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace til {

// Deterministic CSV writing: fixed "%.10g" floats, '.' decimal separator,
// atomic tmp+rename so readers never observe partial files.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(std::move(header)) {}

    static std::string format_double(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    }

    void add_row(const std::vector<double>& values) {
        if (values.size() != columns_.size()) throw std::invalid_argument("csv: row width mismatch");
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format_double(values[i]);
        }
        rows_.push_back(std::move(line));
    }

    void add_text_row(const std::vector<std::string>& values) {
        if (values.size() != columns_.size()) throw std::invalid_argument("csv: row width mismatch");
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += values[i];
        }
        rows_.push_back(std::move(line));
    }

    void write(const std::string& path) const {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("csv: cannot open " + tmp);
            for (std::size_t i = 0; i < columns_.size(); ++i) {
                if (i) out << ',';
                out << columns_[i];
            }
            out << '\n';
            for (const auto& row : rows_) out << row << '\n';
        }
        if (std::rename(tmp.c_str(), path.c_str()) != 0) {
            throw std::runtime_error("csv: cannot rename " + tmp + " to " + path);
        }
    }

    std::size_t row_count() const { return rows_.size(); }

  private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

}  // namespace til

#endif
