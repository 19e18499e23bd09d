#include "blocksplit/mm_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blocksplit {

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& what) {
    throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// strtod-based conversion that rejects trailing garbage.
bool to_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

bool to_int(const std::string& token, int& out) {
    try {
        std::size_t pos = 0;
        out = std::stoi(token, &pos);
        return pos == token.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CsrMatrix mm_read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");

    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) parse_fail(path, 1, "empty file, expected Matrix Market header");
    ++line_no;
    {
        std::istringstream hs(line);
        std::string banner, object, fmt, field, symmetry;
        hs >> banner >> object >> fmt >> field >> symmetry;
        if (banner != "%%MatrixMarket" || lowercase(object) != "matrix" ||
            lowercase(fmt) != "coordinate" || lowercase(field) != "real" ||
            lowercase(symmetry) != "general")
            parse_fail(path, line_no,
                       "unsupported header, expected "
                       "'%%MatrixMarket matrix coordinate real general'");
    }

    // Skip comments, then read the size line.
    int n_rows = 0, n_cols = 0, nnz = 0;
    for (;;) {
        if (!std::getline(in, line)) parse_fail(path, line_no + 1, "missing size line");
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string a, b, c, extra;
        ss >> a >> b >> c;
        if (ss >> extra || !to_int(a, n_rows) || !to_int(b, n_cols) || !to_int(c, nnz))
            parse_fail(path, line_no, "malformed size line '" + line + "'");
        break;
    }
    if (n_rows < 0 || n_cols < 0 || nnz < 0) parse_fail(path, line_no, "negative size");

    std::vector<Triplet> entries;
    entries.reserve(nnz);
    while (static_cast<int>(entries.size()) < nnz) {
        if (!std::getline(in, line))
            parse_fail(path, line_no + 1,
                       "unexpected end of file, got " + std::to_string(entries.size()) + " of " +
                           std::to_string(nnz) + " entries");
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string a, b, c, extra;
        ss >> a >> b >> c;
        int i = 0, j = 0;
        double v = 0.0;
        if (ss >> extra || !to_int(a, i) || !to_int(b, j) || !to_double(c, v))
            parse_fail(path, line_no, "malformed entry '" + line + "'");
        if (i < 1 || i > n_rows || j < 1 || j > n_cols)
            parse_fail(path, line_no, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                          ") outside " + std::to_string(n_rows) + "x" +
                                          std::to_string(n_cols));
        entries.push_back({i - 1, j - 1, v});
    }
    return CsrMatrix::from_triplets(n_rows, n_cols, std::move(entries));
}

void mm_write_matrix(const CsrMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.n_rows << " " << m.n_cols << " " << m.nnz() << "\n";
    for (int i = 0; i < m.n_rows; ++i)
        for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
            out << i + 1 << " " << m.col_indices[k] + 1 << " " << format_value(m.values[k]) << "\n";
    if (!out) throw IoError(path + ": write failed");
}

DenseVector read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    DenseVector v;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string token;
        while (ss >> token) {
            double value = 0.0;
            if (!to_double(token, value)) parse_fail(path, line_no, "malformed value '" + token + "'");
            v.push_back(value);
        }
    }
    return v;
}

void write_vector(const DenseVector& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    for (const double x : v) out << format_value(x) << "\n";
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace blocksplit
