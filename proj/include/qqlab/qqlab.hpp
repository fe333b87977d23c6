#ifndef QQLAB_QQLAB_HPP_
#define QQLAB_QQLAB_HPP_

#include "qqlab/acceptance.hpp"
#include "qqlab/check_report.hpp"
#include "qqlab/conditional_density.hpp"
#include "qqlab/config.hpp"
#include "qqlab/convergence.hpp"
#include "qqlab/density.hpp"
#include "qqlab/errors.hpp"
#include "qqlab/key_process.hpp"
#include "qqlab/parallel.hpp"
#include "qqlab/quadrature.hpp"
#include "qqlab/report.hpp"
#include "qqlab/rng.hpp"
#include "qqlab/statistics.hpp"
#include "qqlab/tails.hpp"

#endif // QQLAB_QQLAB_HPP_
