#pragma once

#include "billiard.hpp"
#include "constructor.hpp"
#include "error.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "periods.hpp"
#include "polygon.hpp"
#include "polynomial.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "quasiperiodic.hpp"
#include "resonance.hpp"
#include "simulate.hpp"
#include "special.hpp"
#include "svg.hpp"
