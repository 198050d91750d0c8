#pragma once

#include "serialdep/types.hpp"
#include "serialdep/parallel.hpp"
#include "serialdep/fast_dcov.hpp"
#include "serialdep/distance.hpp"
#include "serialdep/timeseries.hpp"
#include "serialdep/kernels.hpp"
#include "serialdep/edf.hpp"
#include "serialdep/lag_cache.hpp"
#include "serialdep/portmanteau.hpp"
#include "serialdep/resampling.hpp"
#include "serialdep/models.hpp"
#include "serialdep/experiment.hpp"
#include "serialdep/io.hpp"
#include "serialdep/var.hpp"
#include "serialdep/plot.hpp"
