#pragma once

#include "hanf/anf_seq.hpp"
#include "hanf/error.hpp"
#include "hanf/field_runtime.hpp"
#include "hanf/graph.hpp"
#include "hanf/hll.hpp"
#include "hanf/programs.hpp"
