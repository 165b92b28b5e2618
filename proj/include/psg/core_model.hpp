#pragma once

// Elections, games, strategy profiles and structural classification.

#include "psg/ballots.hpp"
#include "psg/election.hpp"
#include "psg/errors.hpp"
#include "psg/game.hpp"
