#pragma once

#include <gcoh/channels.hpp>
#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>
#include <gcoh/homodyne.hpp>
#include <gcoh/io.hpp>
#include <gcoh/metrics.hpp>
#include <gcoh/sweep.hpp>
