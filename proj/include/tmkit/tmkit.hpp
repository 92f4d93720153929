#pragma once

#include "tmkit/bpmn.hpp"
#include "tmkit/decls.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/errors.hpp"
#include "tmkit/model.hpp"
#include "tmkit/render.hpp"
#include "tmkit/scenario.hpp"
#include "tmkit/sim.hpp"
#include "tmkit/validate.hpp"
