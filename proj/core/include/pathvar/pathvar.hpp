#pragma once

#include "pathvar/drift.hpp"
#include "pathvar/entropy.hpp"
#include "pathvar/errors.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/girsanov.hpp"
#include "pathvar/grid.hpp"
#include "pathvar/measures.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/prekopa.hpp"
#include "pathvar/random.hpp"
#include "pathvar/stochastic.hpp"
#include "pathvar/variational.hpp"
