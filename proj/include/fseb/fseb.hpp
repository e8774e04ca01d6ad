#ifndef FSEB_FSEB_HPP
#define FSEB_FSEB_HPP

// Everything except the command layer, which needs the vendored headers.

#include "fseb/error.hpp"

#include "fseb/numerics/minimize.hpp"
#include "fseb/numerics/quadrature.hpp"
#include "fseb/numerics/rng.hpp"
#include "fseb/numerics/root.hpp"
#include "fseb/numerics/special.hpp"

#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/dataset.hpp"
#include "fseb/engine/evalue_test.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/engine/ratio.hpp"
#include "fseb/engine/validity.hpp"

#include "fseb/models/beta_binomial.hpp"
#include "fseb/models/normal_normal.hpp"
#include "fseb/models/poisson_gamma.hpp"

#include "fseb/adjust/comparators.hpp"
#include "fseb/adjust/multiplicity.hpp"

#include "fseb/simlab/parallel.hpp"
#include "fseb/simlab/runs.hpp"
#include "fseb/simlab/scenario.hpp"

#include "fseb/io/config.hpp"
#include "fseb/io/csv.hpp"
#include "fseb/io/report.hpp"

#endif
