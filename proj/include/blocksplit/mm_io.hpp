#pragma once

// File formats:
//  - CsrMatrix: Matrix Market coordinate format, header
//    "%%MatrixMarket matrix coordinate real general", 1-based indices.
//    Duplicate coordinates are summed on read.
//  - DenseVector: plain text, one value per line, '#' starts a comment.
// Values are written with 17 significant digits so a write/read round trip
// reproduces every double bit-exactly.

#include <stdexcept>
#include <string>

#include "blocksplit/csr.hpp"

namespace blocksplit {

/// Raised on malformed or missing files; messages carry file name and,
/// for parse errors, the 1-based line number.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

CsrMatrix mm_read_matrix(const std::string& path);
void mm_write_matrix(const CsrMatrix& m, const std::string& path);

DenseVector read_vector(const std::string& path);
void write_vector(const DenseVector& v, const std::string& path);

}  // namespace blocksplit
