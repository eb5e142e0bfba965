#pragma once

// Umbrella header for the release-order validation workbench.

#include "relval/csv.hpp"
#include "relval/dataset.hpp"
#include "relval/error.hpp"
#include "relval/harness.hpp"
#include "relval/metaval.hpp"
#include "relval/metrics.hpp"
#include "relval/report.hpp"
#include "relval/rng.hpp"
#include "relval/stats/dist.hpp"
#include "relval/stats/tests.hpp"
#include "relval/validation.hpp"

#include "relval/classifiers/train.hpp"
