#pragma once

#include "mscfb/error.hpp"
#include "mscfb/numerics.hpp"
#include "mscfb/imaging.hpp"
#include "mscfb/filterbank.hpp"
#include "mscfb/model.hpp"
#include "mscfb/recognition.hpp"
#include "mscfb/random.hpp"
#include "mscfb/report.hpp"
#include "mscfb/harness.hpp"
