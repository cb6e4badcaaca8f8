#pragma once

#include "delayosc/errors.hpp"
#include "delayosc/integrate.hpp"
#include "delayosc/io.hpp"
#include "delayosc/lambda.hpp"
#include "delayosc/named_examples.hpp"
#include "delayosc/oscillation.hpp"
#include "delayosc/piecewise.hpp"
#include "delayosc/random_equations.hpp"
#include "delayosc/verify.hpp"
