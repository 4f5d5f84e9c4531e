#pragma once

#include "narrow/affine.hpp"
#include "narrow/analyzer.hpp"
#include "narrow/builder.hpp"
#include "narrow/compiler.hpp"
#include "narrow/error.hpp"
#include "narrow/expr.hpp"
#include "narrow/geometry.hpp"
#include "narrow/interpolator.hpp"
#include "narrow/max_min_string.hpp"
#include "narrow/modulus.hpp"
#include "narrow/relu_net.hpp"
#include "narrow/report.hpp"
#include "narrow/string_io.hpp"
#include "narrow/verify.hpp"
