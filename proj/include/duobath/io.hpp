// io.hpp — deterministic, locale-independent CSV/JSON emission
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace duobath {

// 12 significant digits, general format, locale-independent (std::to_chars
// never consults the locale). Deterministic for identical inputs.
inline std::string format_number(double v, int precision = 12) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, res.ptr);
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals) { rows.emplace_back(vals); }
};

inline void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        out << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::runtime_error("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_number(row[i]);
        }
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary); // binary: no platform newline translation
    if (!out) throw std::runtime_error("write_csv_file: cannot open " + path);
    write_csv(out, table);
    if (!out) throw std::runtime_error("write_csv_file: write failed for " + path);
}

// Minimal long-format (x, y, series-label) emission for external plotting tools.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

inline void write_plot_data(std::ostream& out, const std::vector<PlotSeries>& series) {
    out << "x,y,series\n";
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw std::runtime_error("write_plot_data: x/y size mismatch in " + s.label);
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << format_number(s.x[i]) << ',' << format_number(s.y[i]) << ',' << s.label
                << '\n';
    }
}

} // namespace duobath
