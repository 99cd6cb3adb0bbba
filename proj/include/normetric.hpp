#pragma once

#include "normetric/errors.hpp"
#include "normetric/eval_metrics.hpp"
#include "normetric/metric_core.hpp"
#include "normetric/learners.hpp"
#include "normetric/data_pipeline.hpp"
#include "normetric/harness.hpp"
