#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fdsc/error.hpp"
#include "fdsc/sdp.hpp"

namespace fdsc::sdp {

bool SdpaData::operator==(const SdpaData& o) const {
    if (m != o.m || block_sizes != o.block_sizes || c != o.c || entries.size() != o.entries.size()) return false;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& a = entries[k];
        const auto& b = o.entries[k];
        if (a.mat != b.mat || a.block != b.block || a.i != b.i || a.j != b.j || a.value != b.value) return false;
    }
    return true;
}

SdpaData to_sdpa(const CompiledProblem& cp) {
    SdpaData d;
    d.m = cp.dimension();
    d.c.assign(static_cast<std::size_t>(d.m), 0.0);
    if (cp.cost.size() == d.m) {
        for (int k = 0; k < d.m; ++k) d.c[static_cast<std::size_t>(k)] = cp.cost(k);
    }

    // Matrix blocks first, then all 1x1 blocks as one diagonal block.
    std::vector<std::size_t> dense, scalar;
    for (std::size_t b = 0; b < cp.blocks.size(); ++b) {
        (cp.blocks[b].g0.rows() == 1 ? scalar : dense).push_back(b);
    }
    for (auto b : dense) d.block_sizes.push_back(static_cast<int>(cp.blocks[b].g0.rows()));
    if (!scalar.empty()) d.block_sizes.push_back(-static_cast<int>(scalar.size()));

    auto emit = [&](int mat, int blockno, const Matrix& M, int offset) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            for (Eigen::Index j = i; j < M.cols(); ++j) {
                if (M(i, j) != 0.0) {
                    d.entries.push_back({mat, blockno, static_cast<int>(i) + 1 + offset, static_cast<int>(j) + 1 + offset, M(i, j)});
                }
            }
        }
    };
    for (int mat = 0; mat <= d.m; ++mat) {
        int blockno = 1;
        for (auto b : dense) {
            const auto& blk = cp.blocks[b];
            emit(mat, blockno++, mat == 0 ? Matrix(-blk.g0) : blk.gk[static_cast<std::size_t>(mat - 1)], 0);
        }
        int offset = 0;
        for (auto b : scalar) {
            const auto& blk = cp.blocks[b];
            emit(mat, blockno, mat == 0 ? Matrix(-blk.g0) : blk.gk[static_cast<std::size_t>(mat - 1)], offset++);
        }
    }
    return d;
}

std::string write_sdpa(const SdpaData& d) {
    std::string out;
    char buf[128];
    out += std::to_string(d.m) + "\n";
    out += std::to_string(d.block_sizes.size()) + "\n";
    for (std::size_t b = 0; b < d.block_sizes.size(); ++b) {
        out += (b ? " " : "") + std::to_string(d.block_sizes[b]);
    }
    out += "\n";
    for (std::size_t k = 0; k < d.c.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.17g", k ? " " : "", d.c[k]);
        out += buf;
    }
    out += "\n";
    for (const auto& e : d.entries) {
        std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", e.mat, e.block, e.i, e.j, e.value);
        out += buf;
    }
    return out;
}

namespace {

std::string strip_punctuation(std::string line) {
    for (char& ch : line) {
        if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    return line;
}

[[noreturn]] void parse_error(int lineno, const std::string& what) {
    throw InvalidArgument("SDPA parse error at line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

SdpaData read_sdpa(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    SdpaData d;
    // Leading comment lines start with '"' or '*'.
    while (header.size() < 4 && std::getline(in, line)) {
        ++lineno;
        if (header.empty() && (line.empty() || line[0] == '"' || line[0] == '*')) continue;
        header.push_back(strip_punctuation(line));
    }
    if (header.size() < 4) parse_error(lineno, "truncated header");
    {
        std::istringstream s(header[0]);
        if (!(s >> d.m) || d.m < 0) parse_error(1, "bad variable count");
    }
    int nblocks = 0;
    {
        std::istringstream s(header[1]);
        if (!(s >> nblocks) || nblocks < 1) parse_error(2, "bad block count");
    }
    {
        std::istringstream s(header[2]);
        int v;
        while (s >> v) {
            if (v == 0) parse_error(3, "zero block size");
            d.block_sizes.push_back(v);
        }
        if (static_cast<int>(d.block_sizes.size()) != nblocks) parse_error(3, "block size count mismatch");
    }
    {
        std::istringstream s(header[3]);
        double v;
        while (s >> v) d.c.push_back(v);
        if (static_cast<int>(d.c.size()) != d.m) parse_error(4, "objective length mismatch");
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream s(line);
        SdpaData::Entry e{};
        if (!(s >> e.mat >> e.block >> e.i >> e.j >> e.value)) parse_error(lineno, "malformed entry");
        if (e.mat < 0 || e.mat > d.m) parse_error(lineno, "matrix index out of range");
        if (e.block < 1 || e.block > nblocks) parse_error(lineno, "block index out of range");
        const int size = std::abs(d.block_sizes[static_cast<std::size_t>(e.block - 1)]);
        if (e.i < 1 || e.j < e.i || e.j > size) parse_error(lineno, "entry index out of range");
        if (d.block_sizes[static_cast<std::size_t>(e.block - 1)] < 0 && e.i != e.j) {
            parse_error(lineno, "off-diagonal entry in diagonal block");
        }
        d.entries.push_back(e);
    }
    return d;
}

std::string export_sdpa(const LmiProblem& problem) {
    problem.validate();
    if (!problem.is_real()) throw InvalidArgument("SDPA export needs a real problem; apply embed_hermitian first");
    return write_sdpa(to_sdpa(compile(problem, strictness_margin(problem))));
}

}  // namespace fdsc::sdp
