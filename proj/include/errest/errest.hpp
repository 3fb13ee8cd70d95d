#pragma once

#include "errest/cg.hpp"
#include "errest/cgls.hpp"
#include "errest/cgne.hpp"
#include "errest/craig.hpp"
#include "errest/errors.hpp"
#include "errest/estimate.hpp"
#include "errest/golub_kahan.hpp"
#include "errest/lsqr.hpp"
#include "errest/matrix_market.hpp"
#include "errest/operators.hpp"
#include "errest/oracle.hpp"
#include "errest/precond.hpp"
#include "errest/preconditioned.hpp"
#include "errest/problem.hpp"
#include "errest/rng.hpp"
#include "errest/sparse_matrix.hpp"
#include "errest/synthetic.hpp"
#include "errest/trace.hpp"
#include "errest/vector_ops.hpp"
