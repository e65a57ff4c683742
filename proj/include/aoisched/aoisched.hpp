#pragma once

// Umbrella header for the whole library.

#include "aoisched/channel.hpp"
#include "aoisched/config.hpp"
#include "aoisched/eval.hpp"
#include "aoisched/experiment.hpp"
#include "aoisched/io.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/rng.hpp"
#include "aoisched/solver.hpp"
