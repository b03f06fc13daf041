#include "sbvar/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sbvar {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    raw_row(columns);
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::uint64_t substream_seed(std::uint64_t seed, const std::string& label) {
    // FNV-1a over the label, then a splitmix64 finalizer mixing in the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = h + seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void write_trace_csv(const EvolutionTrace& trace, const std::filesystem::path& path) {
    CsvWriter w(path);
    std::vector<std::string> cols = {"t", "energy", "norm2", "leakage"};
    for (const auto& [name, series] : trace.observables) cols.push_back(name);
    w.header(cols);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::vector<double> row = {trace.times[i], trace.energy[i], trace.norm2[i],
                                   trace.leakage[i]};
        for (const auto& [name, series] : trace.observables) row.push_back(series[i]);
        w.row(row);
    }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_json: cannot open " + path.string());
    return nlohmann::json::parse(in);
}

} // namespace sbvar
