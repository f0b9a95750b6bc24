#pragma once

#include "gsa/allocations.hpp"
#include "gsa/coalition.hpp"
#include "gsa/dataset.hpp"
#include "gsa/errors.hpp"
#include "gsa/estimators.hpp"
#include "gsa/gaussian.hpp"
#include "gsa/models.hpp"
#include "gsa/numeric.hpp"
#include "gsa/parallel.hpp"
#include "gsa/random.hpp"
#include "gsa/table_io.hpp"
