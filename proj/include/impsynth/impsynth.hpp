#pragma once

#include "impsynth/bigint.hpp"
#include "impsynth/error.hpp"
#include "impsynth/godel.hpp"
#include "impsynth/grammar.hpp"
#include "impsynth/problem.hpp"
#include "impsynth/semantics.hpp"
#include "impsynth/sexpr.hpp"
#include "impsynth/spec.hpp"
#include "impsynth/synthesis.hpp"
#include "impsynth/syntax.hpp"
#include "impsynth/term.hpp"
#include "impsynth/value_tree.hpp"
