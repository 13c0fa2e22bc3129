#pragma once

#include "errors.hpp"
#include "scalar.hpp"
#include "poly.hpp"
#include "roots.hpp"
#include "chardir.hpp"
#include "parser.hpp"
#include "orbit.hpp"
#include "oracle.hpp"
#include "render.hpp"
#include "verify.hpp"
#include "io.hpp"
