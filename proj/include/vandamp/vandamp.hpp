#pragma once

#include "vandamp/core.hpp"
#include "vandamp/random.hpp"
#include "vandamp/quadrature.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/linear_operator.hpp"
#include "vandamp/problem/nonlinearity.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/source.hpp"
#include "vandamp/problem/norms.hpp"
#include "vandamp/dynamics/integrator.hpp"
#include "vandamp/dynamics/integrate.hpp"
#include "vandamp/diagnostics/energy_record.hpp"
#include "vandamp/diagnostics/energy.hpp"
#include "vandamp/diagnostics/recorder.hpp"
#include "vandamp/diagnostics/checks.hpp"
#include "vandamp/diagnostics/lemma1.hpp"
#include "vandamp/runner/config.hpp"
#include "vandamp/runner/format.hpp"
#include "vandamp/runner/csv.hpp"
#include "vandamp/runner/scenario.hpp"
#include "vandamp/runner/suite.hpp"
