#pragma once

// Umbrella header for the stash shuffle library.

#include "stash_shuffle/bounds.hpp"
#include "stash_shuffle/compress.hpp"
#include "stash_shuffle/config.hpp"
#include "stash_shuffle/crypto.hpp"
#include "stash_shuffle/distribute.hpp"
#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/io.hpp"
#include "stash_shuffle/oracle.hpp"
#include "stash_shuffle/params.hpp"
#include "stash_shuffle/planner.hpp"
#include "stash_shuffle/record.hpp"
#include "stash_shuffle/report.hpp"
#include "stash_shuffle/rng.hpp"
#include "stash_shuffle/shuffle.hpp"
#include "stash_shuffle/stats.hpp"
#include "stash_shuffle/store.hpp"
#include "stash_shuffle/verify.hpp"
