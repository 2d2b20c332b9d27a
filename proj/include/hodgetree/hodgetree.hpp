// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_HODGETREE_HPP
#define HODGETREE_HODGETREE_HPP

#include "hodgetree/aux_precond.hpp"
#include "hodgetree/dense_oracle.hpp"
#include "hodgetree/eigs.hpp"
#include "hodgetree/experiments.hpp"
#include "hodgetree/hodge_laplace.hpp"
#include "hodgetree/mesh.hpp"
#include "hodgetree/poincare.hpp"
#include "hodgetree/solvers.hpp"
#include "hodgetree/sparse.hpp"
#include "hodgetree/trees.hpp"
#include "hodgetree/whitney.hpp"

#endif
