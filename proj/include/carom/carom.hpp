#pragma once

#include "carom/analysis.hpp"
#include "carom/errors.hpp"
#include "carom/fitting.hpp"
#include "carom/histogram.hpp"
#include "carom/models.hpp"
#include "carom/recovery.hpp"
#include "carom/simulate.hpp"
