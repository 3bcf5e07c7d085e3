#pragma once
// CSV emission with full round-trip precision (17 significant digits), so
// downstream comparisons can be exact. Data files never carry timestamps;
// wall-clock information lives only in the run manifest.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sshbell/common.hpp"

namespace sshbell {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Streaming CSV writer. Cells are appended left to right; end_row()
/// terminates the record. Strings are written verbatim (callers must not
/// pass cells containing commas or newlines).
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw config_error("cannot open for writing: " + path);
        out_.precision(17);
    }

    CsvWriter& cell(const std::string& s) {
        sep();
        out_ << s;
        return *this;
    }
    CsvWriter& cell(const char* s) { return cell(std::string(s)); }
    CsvWriter& cell(double v) { return cell(csv_num(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::uint64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(bool v) { return cell(std::string(v ? "1" : "0")); }

    void end_row() {
        out_ << '\n';
        started_ = false;
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        (cell(cells), ...);
        end_row();
    }

    void close() {
        out_.close();
        if (!out_) throw config_error("CSV write failed");
    }

private:
    void sep() {
        if (started_) out_ << ',';
        started_ = true;
    }

    std::ofstream out_;
    bool started_ = false;
};

}  // namespace sshbell
