// CSV output with provenance header lines. Numbers are printed with 17
// significant digits so identical runs produce byte-identical files.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ghzsim/common.hpp"

namespace ghzsim {

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        out_.precision(17);
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    template <typename... Ts>
    void row(const Ts&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, out_ << vals), ...);
        out_ << "\n";
    }

    void raw(const std::string& s) { out_ << s; }

  private:
    std::ofstream out_;
};

inline std::string format_g17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace ghzsim
