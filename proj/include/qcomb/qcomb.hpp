#pragma once

// Quantum-engineered dual-comb spectroscopy: measurement statistics and
// signal-to-noise ratios of the heterodyne-subtraction and division receivers
// with intra-comb-line squeezed or cross-comb-line entangled combs, validated
// against a Gaussian covariance oracle and Monte-Carlo sampling.

#include "qcomb/comb.hpp"
#include "qcomb/config.hpp"
#include "qcomb/constants.hpp"
#include "qcomb/oracle.hpp"
#include "qcomb/receivers.hpp"
#include "qcomb/sample.hpp"
#include "qcomb/scan.hpp"
#include "qcomb/snr.hpp"
#include "qcomb/squeezing.hpp"
