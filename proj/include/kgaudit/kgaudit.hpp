#pragma once

#include "kgaudit/types.hpp"
#include "kgaudit/kg_store.hpp"
#include "kgaudit/parallel.hpp"
#include "kgaudit/redundancy_audit.hpp"
#include "kgaudit/dataset_derive.hpp"
#include "kgaudit/ranking.hpp"
#include "kgaudit/baseline_predictors.hpp"
#include "kgaudit/rule_engine.hpp"
#include "kgaudit/eval_harness.hpp"
#include "kgaudit/report_io.hpp"
