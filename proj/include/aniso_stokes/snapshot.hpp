#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/grid.hpp"

namespace aniso_stokes {

/// Field snapshot: "ASF1", an ASCII line "dim n1 [n2 [n3]] t\n", then little-endian
/// float64 samples in row-major order.
struct Snapshot {
    ScalarField field;
    double t = 0.0;
};

namespace detail {
inline std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
        return r;
    } else {
        return v;
    }
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}
}  // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const ScalarField& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const auto& g = f.grid();
    std::string header = std::to_string(g.dim);
    for (int a = 0; a < g.dim; ++a) header += " " + std::to_string(g.n[a]);
    header += " " + detail::format_double(t) + "\n";
    out.write("ASF1", 4);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : f.raw()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        bits = detail::to_little_endian(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) throw IoError("write failed for " + path.string());
}

/// Reads a snapshot; the physical period is not stored and defaults to 2*pi per axis.
inline Snapshot read_snapshot(const std::filesystem::path& path, double length = two_pi) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ASF1", 4) != 0) throw IoError(path.string() + ": bad snapshot magic");
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line);
    std::vector<double> tokens;
    double tok;
    while (hs >> tok) tokens.push_back(tok);
    if (tokens.size() < 3) throw IoError(path.string() + ": malformed snapshot header");
    const int dim = static_cast<int>(tokens[0]);
    if (dim < 1 || dim > 3 || static_cast<int>(tokens.size()) != dim + 2)
        throw IoError(path.string() + ": malformed snapshot header");
    GridSpec g;
    g.dim = dim;
    for (int a = 0; a < 3; ++a) {
        g.n[a] = a < dim ? static_cast<int>(tokens[1 + a]) : 1;
        g.length[a] = length;
    }
    g.validate();
    Snapshot snap{ScalarField(g), tokens.back()};
    for (double& v : snap.field.raw()) {
        std::uint64_t bits;
        in.read(reinterpret_cast<char*>(&bits), sizeof bits);
        bits = detail::to_little_endian(bits);
        std::memcpy(&v, &bits, sizeof v);
    }
    if (!in) throw IoError(path.string() + ": truncated snapshot data");
    return snap;
}

}  // namespace aniso_stokes
