#pragma once

// Convenience header pulling in every stage.

#include "cowrite/coder.hpp"
#include "cowrite/csv.hpp"
#include "cowrite/ena.hpp"
#include "cowrite/error.hpp"
#include "cowrite/parallel.hpp"
#include "cowrite/pipeline.hpp"
#include "cowrite/report.hpp"
#include "cowrite/sentence.hpp"
#include "cowrite/similarity.hpp"
#include "cowrite/similarity_remote.hpp"
#include "cowrite/stats.hpp"
#include "cowrite/synthgen.hpp"
#include "cowrite/trace.hpp"
#include "cowrite/unicode.hpp"
