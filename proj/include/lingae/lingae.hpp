#pragma once

#include "lingae/errors.hpp"
#include "lingae/matrix.hpp"
#include "lingae/decompositions.hpp"
#include "lingae/graph.hpp"
#include "lingae/model.hpp"
#include "lingae/synth.hpp"
#include "lingae/alignment.hpp"
#include "lingae/eval.hpp"
#include "lingae/theory.hpp"
#include "lingae/io.hpp"
#include "lingae/experiment.hpp"
