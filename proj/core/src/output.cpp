#include "hydrostore/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

double parse_cell(const std::string& cell, int line) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw ParseError("malformed number '" + cell + "'", line);
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_timeseries(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path) {
    if (records.empty()) throw ValidationError("write_timeseries: no records");
    auto out = open_for_write(path);
    out << kTimeseriesHeader << '\n';
    for (const auto& r : records) {
        out << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.energy) << ','
            << format_double(r.J) << ',' << optional_cell(r.phi1) << ',' << optional_cell(r.phi2) << ','
            << format_double(r.min_chi) << ',' << format_double(r.max_chi) << ','
            << format_double(r.min_u) << ',' << format_double(r.min_theta) << ','
            << format_double(r.energy_residual) << ',' << optional_cell(r.dissipation_residual) << ','
            << r.outer_iterations << '\n';
    }
    finish(out, path);
}

void write_snapshot(const State& s, const std::filesystem::path& path) {
    const Grid& g = *s.grid();
    auto out = open_for_write(path);
    out << "# hydrostore snapshot t=" << format_double(s.t) << " dim=" << g.dim() << " cells=" << g.cells(0);
    if (g.dim() == 2) out << ',' << g.cells(1);
    out << " lengths=" << format_double(g.length(0));
    if (g.dim() == 2) out << ',' << format_double(g.length(1));
    out << '\n';
    out << (g.dim() == 2 ? "x,y," : "x,") << "e,theta,chi,xi,u,p\n";
    for (Index k = 0; k < g.node_count(); ++k) {
        const auto [x, y] = g.coordinate(k);
        out << format_double(x) << ',';
        if (g.dim() == 2) out << format_double(y) << ',';
        out << format_double(s.e[k]) << ',' << format_double(s.theta[k]) << ',' << format_double(s.chi[k])
            << ',' << format_double(s.xi[k]) << ',' << format_double(s.u[k]) << ','
            << format_double(s.p[k]) << '\n';
    }
    finish(out, path);
}

State read_snapshot(const std::filesystem::path& path, const GridPtr& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty snapshot", 1);
    std::istringstream head(line);
    std::string hash, tag, kind, t_tok, dim_tok, cells_tok, lengths_tok;
    head >> hash >> tag >> kind >> t_tok >> dim_tok >> cells_tok >> lengths_tok;
    if (hash != "#" || tag != "hydrostore" || kind != "snapshot" || t_tok.rfind("t=", 0) != 0 || dim_tok.rfind("dim=", 0) != 0 ||
        cells_tok.rfind("cells=", 0) != 0 || lengths_tok.rfind("lengths=", 0) != 0)
        throw ParseError("missing snapshot header", 1);

    std::ostringstream expect_cells, expect_lengths;
    expect_cells << "cells=" << grid->cells(0);
    expect_lengths << "lengths=" << format_double(grid->length(0));
    if (grid->dim() == 2) {
        expect_cells << ',' << grid->cells(1);
        expect_lengths << ',' << format_double(grid->length(1));
    }
    if (dim_tok != "dim=" + std::to_string(grid->dim()) || cells_tok != expect_cells.str() ||
        lengths_tok != expect_lengths.str())
        throw ValidationError("snapshot grid mismatch: file has " + dim_tok + " " + cells_tok + " " +
                              lengths_tok);

    State s;
    s.t = parse_cell(t_tok.substr(2), 1);

    const int coords = grid->dim();
    const std::size_t columns = static_cast<std::size_t>(coords) + 6;
    if (!std::getline(in, line)) throw ParseError("missing column header", 2);

    const Index m = grid->node_count();
    std::vector<Vector> cols(6, Vector(m));
    int line_no = 2;
    for (Index k = 0; k < m; ++k) {
        ++line_no;
        if (!std::getline(in, line))
            throw ParseError("truncated snapshot: expected " + std::to_string(m) + " node rows, got " +
                                 std::to_string(k),
                             line_no);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != columns)
            throw ParseError("expected " + std::to_string(columns) + " columns, got " +
                                 std::to_string(cells.size()),
                             line_no);
        const auto [x, y] = grid->coordinate(k);
        const double fx = parse_cell(cells[0], line_no);
        const double fy = coords == 2 ? parse_cell(cells[1], line_no) : 0.0;
        if (std::abs(fx - x) > 1e-12 * (1.0 + std::abs(x)) || std::abs(fy - y) > 1e-12 * (1.0 + std::abs(y)))
            throw ValidationError("snapshot grid mismatch at node " + std::to_string(k));
        for (std::size_t c = 0; c < 6; ++c)
            cols[c][k] = parse_cell(cells[static_cast<std::size_t>(coords) + c], line_no);
    }

    s.e = Field(grid, std::move(cols[0]));
    s.theta = Field(grid, std::move(cols[1]));
    s.chi = Field(grid, std::move(cols[2]));
    s.xi = Field(grid, std::move(cols[3]));
    s.u = Field(grid, std::move(cols[4]));
    s.p = Field(grid, std::move(cols[5]));
    return s;
}

}  // namespace hydrostore
