#pragma once

// Umbrella header for the sie2d library: a pseudo-spectral simulator for
// the 2D stochastic incompressible Euler equations on the torus in
// vorticity form, with a splitting semi-implicit time integrator and a
// convergence laboratory.

#include "sie2d/config.hpp"
#include "sie2d/convergence.hpp"
#include "sie2d/field.hpp"
#include "sie2d/io.hpp"
#include "sie2d/modes.hpp"
#include "sie2d/noise.hpp"
#include "sie2d/operators.hpp"
#include "sie2d/runner.hpp"
#include "sie2d/selfcheck.hpp"
#include "sie2d/stepper.hpp"
#include "sie2d/transforms.hpp"
