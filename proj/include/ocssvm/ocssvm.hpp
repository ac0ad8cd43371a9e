#pragma once

#include "ocssvm/errors.hpp"
#include "ocssvm/core_types.hpp"
#include "ocssvm/kernels.hpp"
#include "ocssvm/smo_solver.hpp"
#include "ocssvm/reference_qp.hpp"
#include "ocssvm/data_io.hpp"
#include "ocssvm/eval_bench.hpp"
