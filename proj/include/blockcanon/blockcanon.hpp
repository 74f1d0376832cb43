#pragma once

// Block matrices in canonical form: compressed storage, the partition
// rotation, matrix functions (determinant, inverse, powers, exp, log),
// block correlation validity and log-parametrization, and closed-form
// Gaussian maximum likelihood with analytic scores. The dense reference
// implementations live in blockcanon/oracle/dense.hpp and are test-only.

#include "blockcanon/block_matrix.hpp"
#include "blockcanon/canonical.hpp"
#include "blockcanon/correlation.hpp"
#include "blockcanon/errors.hpp"
#include "blockcanon/io.hpp"
#include "blockcanon/matrix_functions.hpp"
#include "blockcanon/mle.hpp"
#include "blockcanon/model_selection.hpp"
#include "blockcanon/panel.hpp"
#include "blockcanon/partition.hpp"
#include "blockcanon/rotation.hpp"
#include "blockcanon/simulate.hpp"
