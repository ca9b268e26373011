#pragma once

#include <hcsvd/baselines.hpp>
#include <hcsvd/dissimilarity.hpp>
#include <hcsvd/divisive.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/io.hpp>
#include <hcsvd/matrixkit.hpp>
#include <hcsvd/parallel.hpp>
#include <hcsvd/simbench.hpp>
#include <hcsvd/sparse_loadings.hpp>
#include <hcsvd/tree.hpp>
