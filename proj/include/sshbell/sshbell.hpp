#pragma once
// Umbrella header: the whole library in one include.

#include "sshbell/analytic.hpp"
#include "sshbell/commands.hpp"
#include "sshbell/common.hpp"
#include "sshbell/config.hpp"
#include "sshbell/csv.hpp"
#include "sshbell/entangle.hpp"
#include "sshbell/evolve.hpp"
#include "sshbell/lattice.hpp"
#include "sshbell/manifest.hpp"
#include "sshbell/presets.hpp"
#include "sshbell/schedule.hpp"
#include "sshbell/states.hpp"
#include "sshbell/threading.hpp"
