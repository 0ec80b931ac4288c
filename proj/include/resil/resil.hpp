#pragma once

#include "resil/analyze.hpp"
#include "resil/components.hpp"
#include "resil/io.hpp"
#include "resil/lp.hpp"
#include "resil/model.hpp"
#include "resil/oracle.hpp"
#include "resil/rational.hpp"
#include "resil/scheduler.hpp"
#include "resil/simulate.hpp"
#include "resil/synth.hpp"
#include "resil/transform.hpp"
