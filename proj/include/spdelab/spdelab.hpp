#pragma once

#include "spdelab/errors.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/statistics.hpp"
#include "spdelab/spectral_space.hpp"
#include "spdelab/models.hpp"
#include "spdelab/navier_stokes.hpp"
#include "spdelab/path_record.hpp"
#include "spdelab/reflection.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/test_function.hpp"
#include "spdelab/coupling.hpp"
#include "spdelab/monte_carlo.hpp"
#include "spdelab/harnack.hpp"
