#pragma once

#include "metric_action_lab/errors.hpp"
#include "metric_action_lab/extended_real.hpp"
#include "metric_action_lab/residual.hpp"
#include "metric_action_lab/spaces.hpp"
#include "metric_action_lab/sampling.hpp"
#include "metric_action_lab/chart.hpp"
#include "metric_action_lab/functionals.hpp"
#include "metric_action_lab/minimize1d.hpp"
#include "metric_action_lab/proximal.hpp"
#include "metric_action_lab/flow.hpp"
#include "metric_action_lab/curves.hpp"
#include "metric_action_lab/action_min.hpp"
#include "metric_action_lab/recovery.hpp"
#include "metric_action_lab/expression.hpp"
#include "metric_action_lab/parallel.hpp"
#include "metric_action_lab/io.hpp"
#include "metric_action_lab/certificates.hpp"
#include "metric_action_lab/report.hpp"
#include "metric_action_lab/harness.hpp"
#include "metric_action_lab/validate.hpp"
#include "metric_action_lab/config.hpp"
#include "metric_action_lab/commands.hpp"
