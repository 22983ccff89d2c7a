#pragma once

#include "aniso_stokes/audits.hpp"
#include "aniso_stokes/config.hpp"
#include "aniso_stokes/coupled.hpp"
#include "aniso_stokes/diagnostics.hpp"
#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/fft.hpp"
#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/hypotheses.hpp"
#include "aniso_stokes/log.hpp"
#include "aniso_stokes/mollifier.hpp"
#include "aniso_stokes/snapshot.hpp"
#include "aniso_stokes/spectral.hpp"
#include "aniso_stokes/stokes.hpp"
#include "aniso_stokes/studies.hpp"
#include "aniso_stokes/transport.hpp"
#include "aniso_stokes/viscosity.hpp"
