#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cpcoh/tensor.hpp"

// HTNS1: line 1 = d, line 2 = dims, then prod(dims) lines "re im" in
// row-major order (mode 1 slowest), written with 17 significant digits.
//
// HTNSD (dictionaries): line 1 = d, line 2 = dims, line 3 = atom count m,
// then for each atom and each mode k, n_k lines "re im".
namespace cpcoh::io {

Hypermatrix read_htns(std::istream& in);
Hypermatrix read_htns_file(const std::string& path);
void write_htns(std::ostream& out, const Hypermatrix& t);
void write_htns_file(const std::string& path, const Hypermatrix& t);

/// A d = 2 HTNS1 tensor read as an n x r matrix (columns are the vectors).
Mat read_matrix_file(const std::string& path);

std::vector<std::vector<Vec>> read_dictionary(std::istream& in);
std::vector<std::vector<Vec>> read_dictionary_file(const std::string& path);
void write_dictionary(std::ostream& out, const std::vector<std::vector<Vec>>& atoms);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace cpcoh::io
