#pragma once

#include "paraqnn/adam.hpp"
#include "paraqnn/baselines.hpp"
#include "paraqnn/bench.hpp"
#include "paraqnn/dataset.hpp"
#include "paraqnn/dyngen.hpp"
#include "paraqnn/errors.hpp"
#include "paraqnn/figures.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/losses.hpp"
#include "paraqnn/noise.hpp"
#include "paraqnn/paranet.hpp"
#include "paraqnn/pinn.hpp"
#include "paraqnn/rng.hpp"
#include "paraqnn/runner.hpp"
#include "paraqnn/stamp.hpp"
#include "paraqnn/svg.hpp"
#include "paraqnn/tanhnet.hpp"
#include "paraqnn/training.hpp"
