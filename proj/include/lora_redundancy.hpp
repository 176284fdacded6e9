#pragma once

#include "lora_redundancy/airtime.hpp"
#include "lora_redundancy/allocator.hpp"
#include "lora_redundancy/analysis.hpp"
#include "lora_redundancy/channel.hpp"
#include "lora_redundancy/config.hpp"
#include "lora_redundancy/errors.hpp"
#include "lora_redundancy/experiment.hpp"
#include "lora_redundancy/lookup_table.hpp"
#include "lora_redundancy/netsim.hpp"
#include "lora_redundancy/quadrature.hpp"
#include "lora_redundancy/rng.hpp"
#include "lora_redundancy/version.hpp"
