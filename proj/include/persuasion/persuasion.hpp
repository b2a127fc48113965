#pragma once

// Umbrella header for the persuasion solvers.

#include "persuasion/core_model.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/plan.hpp"
#include "persuasion/binary.hpp"
#include "persuasion/general.hpp"
#include "persuasion/scheme.hpp"
#include "persuasion/queue_model.hpp"
#include "persuasion/queue.hpp"
