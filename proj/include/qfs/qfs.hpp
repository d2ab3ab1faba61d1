// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qfs/delta.hpp"
#include "qfs/dense_power.hpp"
#include "qfs/errors.hpp"
#include "qfs/height.hpp"
#include "qfs/matrix_io.hpp"
#include "qfs/modarith.hpp"
#include "qfs/modmatrix.hpp"
#include "qfs/monomials.hpp"
#include "qfs/mts.hpp"
#include "qfs/ntt.hpp"
#include "qfs/parallel.hpp"
#include "qfs/poly.hpp"
#include "qfs/poly_io.hpp"
#include "qfs/search.hpp"
