#pragma once

// Umbrella header for the charwave library: a characteristic-grid solver for
// the 1+1d wave equation V(x) u_tt - u_xx = 0 on the half line with the
// quasilinear Neumann condition u_x(0,t) = (f(u_t(0,t)))_t, together with its
// conserved quantities, weak-form diagnostics, and the time-periodic
// (breather) toolkit for periodic step media.

#include "charwave/breather.hpp"
#include "charwave/config.hpp"
#include "charwave/diagnostics.hpp"
#include "charwave/errors.hpp"
#include "charwave/field.hpp"
#include "charwave/interface_boundary.hpp"
#include "charwave/io.hpp"
#include "charwave/ivp.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/nonuniqueness.hpp"
#include "charwave/potential.hpp"
#include "charwave/quadrature.hpp"
#include "charwave/triangles.hpp"
#include "charwave/util.hpp"
