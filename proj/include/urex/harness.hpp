#pragma once

#include "urex/harness/bandit_experiment.hpp"
#include "urex/harness/generalize.hpp"
#include "urex/harness/grid.hpp"
#include "urex/harness/trace.hpp"
#include "urex/harness/trial.hpp"
#include "urex/harness/trial_spec.hpp"
