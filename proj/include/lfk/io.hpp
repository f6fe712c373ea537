#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfk/config.hpp"
#include "lfk/pide.hpp"

namespace lfk {

// One scalar-estimate row of an fk artifact.
struct FkRow {
    double t = 0.0;
    double p = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    uint64_t n_paths = 0;
    double dt = 0.0;
    uint64_t seed = 0;
};

std::string format_g17(double x);
std::string hash_hex(uint64_t h);

// Writes bytes to path via a temp file in the same directory plus rename, so
// readers never observe a partial artifact.
void atomic_write(const std::string& path, const std::string& bytes);

std::string render_fk_csv(const RunConfig& cfg, const std::vector<FkRow>& rows);
std::string render_fk_json(const RunConfig& cfg, const std::vector<FkRow>& rows);

std::string render_grid_csv(const RunConfig& cfg, const GridSolution& sol);
std::string render_grid_json(const RunConfig& cfg, const GridSolution& sol);

// Bordered matrix layout: cell (0,0) is zero, the rest of row 0 holds the
// space grid, the rest of column 0 holds the stored times, and cell (i,j)
// with i,j >= 1 holds u(t_i, x_j).
std::vector<double> bordered_matrix(const GridSolution& sol,
                                    uint64_t* rows, uint64_t* cols);

// "LFK1" | u32 version=1 | u64 rows | u64 cols | rows*cols f64, little-endian
// row-major.
std::string render_slab(uint64_t rows, uint64_t cols,
                        const std::vector<double>& data);
struct Slab {
    uint64_t rows = 0;
    uint64_t cols = 0;
    std::vector<double> data;
};
Slab parse_slab(const std::string& bytes);

// Generic labelled table with the shared comment preamble; used by the
// variational and asymptotics subcommands.
struct Table {
    std::string method;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> notes; // extra # key=value
};
std::string render_table_csv(const RunConfig& cfg, const Table& table);
std::string render_table_json(const RunConfig& cfg, const Table& table);

// Merges CSV artifacts into one report, grouped by method. Artifacts of the
// same method must share an identical header line.
std::string merge_reports_csv(const std::vector<std::string>& paths);
std::string merge_reports_json(const std::vector<std::string>& paths);

} // namespace lfk
