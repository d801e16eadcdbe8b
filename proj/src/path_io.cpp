#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "invmc/processes.hpp"

namespace invmc {

namespace {
constexpr std::array<char, 8> kMagic{'I', 'N', 'V', 'M', 'C', 'P', 'S', '1'};
}

void write_paths_csv(const PathSet& paths, const std::string& file) {
    std::FILE* out = std::fopen(file.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    std::fprintf(out, "path,step,component,value\n");
    for (int m = 0; m < paths.paths(); ++m) {
        for (int n = 0; n <= paths.steps(); ++n) {
            for (int d = 0; d < paths.dim(); ++d) {
                std::fprintf(out, "%d,%d,%d,%.17g\n", m, n, d, paths.value(m, n, d));
            }
        }
    }
    std::fclose(out);
}

PathSet read_paths_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::string line;
    std::getline(in, line);
    if (line.rfind("path,step,component,value", 0) != 0) throw std::runtime_error(file + ": unexpected CSV header");
    std::vector<std::tuple<int, int, int, double>> rows;
    int m_max = -1, n_max = -1, d_max = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int m, n, d;
        double v;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &m, &n, &d, &v) != 4 || m < 0 || n < 0 || d < 0) {
            throw std::runtime_error(file + ": malformed row '" + line + "'");
        }
        rows.emplace_back(m, n, d, v);
        m_max = std::max(m_max, m);
        n_max = std::max(n_max, n);
        d_max = std::max(d_max, d);
    }
    PathSet paths(m_max + 1, n_max, d_max + 1, 0);
    const std::size_t expected = static_cast<std::size_t>(m_max + 1) * (n_max + 1) * (d_max + 1);
    if (rows.size() != expected) throw std::runtime_error(file + ": incomplete path table");
    for (const auto& [m, n, d, v] : rows) paths.state(m, n)[d] = v;
    return paths;
}

void write_paths_binary(const PathSet& paths, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    const std::int32_t dims[3] = {paths.paths(), paths.steps(), paths.dim()};
    const std::uint64_t seed = paths.seed();
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    out.write(reinterpret_cast<const char*>(&seed), sizeof seed);
    out.write(reinterpret_cast<const char*>(paths.values().data()),
              static_cast<std::streamsize>(paths.values().size() * sizeof(double)));
}

PathSet read_paths_binary(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::array<char, 8> magic{};
    std::int32_t dims[3];
    std::uint64_t seed = 0;
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    in.read(reinterpret_cast<char*>(&seed), sizeof seed);
    if (!in || magic != kMagic) throw std::runtime_error(file + ": not an invmc path file");
    PathSet paths(dims[0], dims[1], dims[2], seed);
    in.read(reinterpret_cast<char*>(paths.values().data()),
            static_cast<std::streamsize>(paths.values().size() * sizeof(double)));
    if (!in) throw std::runtime_error(file + ": truncated path file");
    return paths;
}

}  // namespace invmc
