#pragma once

#include "base.hpp"
#include "calculus.hpp"
#include "decimation.hpp"
#include "eigensolver.hpp"
#include "fft.hpp"
#include "gasket.hpp"
#include "heatkernel.hpp"
#include "hormander.hpp"
#include "linalg.hpp"
#include "report.hpp"
#include "symbols.hpp"
