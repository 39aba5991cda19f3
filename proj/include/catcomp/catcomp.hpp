#pragma once

#include "catcomp/hilbert.hpp"
#include "catcomp/gates.hpp"
#include "catcomp/grids.hpp"
#include "catcomp/dynamics.hpp"
#include "catcomp/fit.hpp"
#include "catcomp/nelder_mead.hpp"
#include "catcomp/tomography.hpp"
#include "catcomp/protocol.hpp"
#include "catcomp/experiments.hpp"
#include "catcomp/io.hpp"
