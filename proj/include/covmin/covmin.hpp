#pragma once

#include "covmin/certifier.hpp"
#include "covmin/congruence.hpp"
#include "covmin/covering.hpp"
#include "covmin/directed_real.hpp"
#include "covmin/errors.hpp"
#include "covmin/factor.hpp"
#include "covmin/filtration.hpp"
#include "covmin/integer.hpp"
#include "covmin/lll.hpp"
#include "covmin/optimizer.hpp"
#include "covmin/prime_estimates.hpp"
#include "covmin/primes.hpp"
#include "covmin/residue_set.hpp"
#include "covmin/sieve_lab.hpp"
