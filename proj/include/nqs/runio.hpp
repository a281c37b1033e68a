#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nqs/scaling.hpp"

namespace nqs::runio {

// Flat key-value config with [section] headers, '#' comments, and no nesting.
struct ConfigFile {
    std::string path;
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<long> get_long_list(const std::string& section, const std::string& key) const;
};

ConfigFile parse_config_file(const std::string& path);
ConfigFile parse_config_text(const std::string& text, const std::string& label);

// One results row; optional metrics serialize as empty fields.
struct ResultRow {
    std::string config_hash;
    std::string ansatz;
    std::string molecule;
    int n_qubits = 0;
    int n_electrons = -1;
    long n_raw = 0;
    double n_k = 0.0;
    long t_steps = 0;
    long max_unique = 0;
    double b_mean = 0.0;
    double sf = 0.0;
    double d_prime = 0.0;
    double energy = 0.0;
    double variance = 0.0;
    std::optional<double> vscore;
    std::optional<double> abs_error;
    double flops_table1 = 0.0;
    double flops_simplified = 0.0;
    std::string status = "ok";
    uint64_t seed = 0;
    std::string timestamp;
};

std::string results_header();
std::string format_row(const ResultRow& row);
ResultRow parse_row(const std::string& line);

// Reads a results file, validating the header. Missing file -> error.
std::vector<ResultRow> read_results_csv(const std::string& path);
// Appends rows, creating the file with its header first when absent.
void append_results(const std::string& path, const std::vector<ResultRow>& rows);

uint64_t fnv1a(const std::string& text);
std::string hash_hex(uint64_t h);
std::string iso_timestamp();

// Fitted-curve interchange document: one key = value pair per line.
void write_curve_document(const std::string& path, const scaling::ScalingCurve& curve);
scaling::ScalingCurve read_curve_document(const std::string& path);

}  // namespace nqs::runio
