#pragma once

#include "errors.hpp"
#include "taylor.hpp"
#include "quadrature.hpp"
#include "potential.hpp"
#include "jost.hpp"
#include "parallel.hpp"
#include "pdet.hpp"
#include "spectrum.hpp"
#include "jet_polynomial.hpp"
#include "asymptotics.hpp"
#include "traceform.hpp"
