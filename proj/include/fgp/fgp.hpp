#pragma once

#include "fgp/covariance.hpp"
#include "fgp/cv.hpp"
#include "fgp/detrend.hpp"
#include "fgp/diagnostics.hpp"
#include "fgp/embed.hpp"
#include "fgp/grid.hpp"
#include "fgp/io.hpp"
#include "fgp/likelihood.hpp"
#include "fgp/mixture.hpp"
#include "fgp/rng.hpp"
#include "fgp/simulate.hpp"
#include "fgp/spectral_diagonal.hpp"
#include "fgp/spectral_model.hpp"
#include "fgp/stationary.hpp"
#include "fgp/transform.hpp"
