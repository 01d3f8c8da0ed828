#pragma once

#include "gearwave/config.hpp"
#include "gearwave/error.hpp"
#include "gearwave/exact_wavelet.hpp"
#include "gearwave/features.hpp"
#include "gearwave/optim.hpp"
#include "gearwave/pipeline.hpp"
#include "gearwave/random.hpp"
#include "gearwave/signal.hpp"
#include "gearwave/svm.hpp"
#include "gearwave/wavelet.hpp"
