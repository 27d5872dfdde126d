#pragma once

#include <complex>
#include <vector>

#include "povmseq/matrix.hpp"

namespace povmseq {

// The measurement layer works in double precision throughout; the matrix and
// eigensolver kernels underneath stay generic.
using Cx = std::complex<double>;
using Mat = Matrix<double>;
using Vec = std::vector<Cx>;

} // namespace povmseq
