#pragma once

#include "lodwave/assembly.hpp"
#include "lodwave/band.hpp"
#include "lodwave/config.hpp"
#include "lodwave/correctors.hpp"
#include "lodwave/dense.hpp"
#include "lodwave/experiments.hpp"
#include "lodwave/interpolation.hpp"
#include "lodwave/mesh.hpp"
#include "lodwave/problems.hpp"
#include "lodwave/runner.hpp"
#include "lodwave/saddle.hpp"
#include "lodwave/sparse.hpp"
#include "lodwave/threading.hpp"
#include "lodwave/vtk.hpp"
#include "lodwave/wavesolve.hpp"
