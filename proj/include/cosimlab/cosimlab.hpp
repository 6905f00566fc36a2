#pragma once

#include "cosimlab/compensator.hpp"
#include "cosimlab/config.hpp"
#include "cosimlab/cosim.hpp"
#include "cosimlab/csv.hpp"
#include "cosimlab/design.hpp"
#include "cosimlab/error.hpp"
#include "cosimlab/extrapolator.hpp"
#include "cosimlab/frequency_response.hpp"
#include "cosimlab/integrator.hpp"
#include "cosimlab/network.hpp"
#include "cosimlab/online_trainer.hpp"
#include "cosimlab/plants.hpp"
#include "cosimlab/scenario.hpp"
#include "cosimlab/signal_history.hpp"
#include "cosimlab/trace_analysis.hpp"
#include "cosimlab/training.hpp"
#include "cosimlab/transfer.hpp"
