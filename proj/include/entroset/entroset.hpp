#pragma once

// Everything except the command-line dispatcher.

#include "entroset/coupling.hpp"
#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/group.hpp"
#include "entroset/harness.hpp"
#include "entroset/json_io.hpp"
#include "entroset/magnification.hpp"
#include "entroset/markov.hpp"
#include "entroset/method_of_types.hpp"
#include "entroset/rng.hpp"
#include "entroset/transport.hpp"
