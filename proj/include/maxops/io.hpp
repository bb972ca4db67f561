#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "maxops/grid.hpp"

namespace maxops {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string(what) + ": cannot parse number '" + s + "'");
    }
}

/// Write via a temporary file in the same directory, then rename, so readers
/// never observe a half-written file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw std::runtime_error("rename failed: " + target.string() + ": " + ec.message());
}

// Field CSV layout: one header line `# dim,extent,spacing,origin`, then cell
// values. 1D: one value per line. 2D: one row (first axis index) per line,
// values across the second axis separated by commas.
inline std::string grid_function_to_csv(const GridFunction& f) {
    std::ostringstream out;
    const Grid& g = f.grid;
    out << "# " << g.dim << ',' << g.extent << ',' << format_double(g.spacing) << ','
        << format_double(g.origin) << '\n';
    if (g.dim == 1) {
        for (int i = 0; i < g.extent; ++i) out << format_double(f.values[i]) << '\n';
    } else {
        for (int i0 = 0; i0 < g.extent; ++i0) {
            for (int i1 = 0; i1 < g.extent; ++i1) {
                if (i1) out << ',';
                out << format_double(f.at(i0, i1));
            }
            out << '\n';
        }
    }
    return out.str();
}

inline void write_grid_function_csv(const std::string& path, const GridFunction& f) {
    atomic_write_text(path, grid_function_to_csv(f));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline GridFunction grid_function_from_csv(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#')
        throw std::runtime_error(std::string(what) + ": missing '# dim,extent,spacing,origin' header");
    const auto head = split_csv_line(line.substr(1));
    if (head.size() != 4)
        throw std::runtime_error(std::string(what) + ": header must carry dim,extent,spacing,origin");
    const int dim = int(parse_double(head[0], what));
    const int extent = int(parse_double(head[1], what));
    const double spacing = parse_double(head[2], what);
    const double origin = parse_double(head[3], what);
    Grid g{dim, extent, spacing, origin};
    validate(g);

    std::vector<double> values;
    values.reserve(std::size_t(g.cell_count()));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (g.dim == 1 && fields.size() != 1)
            throw std::runtime_error(std::string(what) + ": expected one value per line");
        if (g.dim == 2 && int(fields.size()) != g.extent)
            throw std::runtime_error(std::string(what) + ": expected one row of " +
                                     std::to_string(g.extent) + " values per line");
        for (const auto& fld : fields) values.push_back(parse_double(fld, what));
    }
    if (int(values.size()) != g.cell_count())
        throw std::runtime_error(std::string(what) + ": value count does not match grid");
    return make_grid_function(g, std::move(values));
}

inline GridFunction read_grid_function_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return grid_function_from_csv(in, path.c_str());
}

} // namespace maxops
