#pragma once

#include "psg/core_model.hpp"
#include "psg/experiment.hpp"
#include "psg/fixtures.hpp"
#include "psg/games.hpp"
#include "psg/json_io.hpp"
#include "psg/pabulib.hpp"
#include "psg/random.hpp"
#include "psg/rational.hpp"
#include "psg/rules.hpp"
