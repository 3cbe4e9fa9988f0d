#pragma once

#include "escrow/bench.hpp"
#include "escrow/errors.hpp"
#include "escrow/instance_file.hpp"
#include "escrow/natural.hpp"
#include "escrow/numtheory.hpp"
#include "escrow/random.hpp"
#include "escrow/rsa.hpp"
#include "escrow/ssb.hpp"
#include "escrow/tsb.hpp"
