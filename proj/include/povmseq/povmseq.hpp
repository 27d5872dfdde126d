#pragma once

// Umbrella header: sequential realization of finite-outcome POVMs with a
// single ancilla qubit.

#include "povmseq/dilation.hpp"
#include "povmseq/eig.hpp"
#include "povmseq/errors.hpp"
#include "povmseq/io.hpp"
#include "povmseq/matrix.hpp"
#include "povmseq/povm.hpp"
#include "povmseq/rng.hpp"
#include "povmseq/sequential.hpp"
#include "povmseq/types.hpp"
#include "povmseq/usd.hpp"
