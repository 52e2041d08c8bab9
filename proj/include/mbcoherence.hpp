#pragma once

#include "mbcoherence/analysis.hpp"
#include "mbcoherence/coherence.hpp"
#include "mbcoherence/combinatorics.hpp"
#include "mbcoherence/correlators.hpp"
#include "mbcoherence/errors.hpp"
#include "mbcoherence/experiments.hpp"
#include "mbcoherence/fock_algebra.hpp"
#include "mbcoherence/haar.hpp"
#include "mbcoherence/linalg.hpp"
#include "mbcoherence/parallel.hpp"
#include "mbcoherence/sampling.hpp"
#include "mbcoherence/state_io.hpp"
#include "mbcoherence/states.hpp"
#include "mbcoherence/unitary.hpp"
