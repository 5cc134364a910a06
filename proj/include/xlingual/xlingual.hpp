#pragma once

#include "xlingual/adversarial.hpp"
#include "xlingual/alignment.hpp"
#include "xlingual/corpus_stats.hpp"
#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/graph.hpp"
#include "xlingual/numerics.hpp"
#include "xlingual/retrieval.hpp"
#include "xlingual/statistics.hpp"
#include "xlingual/synthbench.hpp"
