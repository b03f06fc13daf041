#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sbvar/tdvp.hpp"

namespace sbvar {

/// CSV writer with locale-independent, repeatable number formatting
/// (shortest round-trip representation).
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

std::string format_double(double v);

/// Deterministic per-stage RNG streams: substream(seed, label) is stable
/// across platforms and runs.
std::uint64_t substream_seed(std::uint64_t seed, const std::string& label);

/// Writes an EvolutionTrace as CSV: t, energy, norm2, leakage, then one
/// column per recorded observable.
void write_trace_csv(const EvolutionTrace& trace, const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace sbvar
