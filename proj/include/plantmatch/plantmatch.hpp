// plantmatch.hpp - umbrella header.
#pragma once

#include "plantmatch/alignment.hpp"
#include "plantmatch/anneal.hpp"
#include "plantmatch/csv.hpp"
#include "plantmatch/dspfp.hpp"
#include "plantmatch/evaluate.hpp"
#include "plantmatch/flooding.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/objective.hpp"
#include "plantmatch/quality.hpp"
#include "plantmatch/rng.hpp"
#include "plantmatch/similarity.hpp"
#include "plantmatch/simplify.hpp"
#include "plantmatch/synthetic.hpp"
