#pragma once

#include "pimdp/bounds.hpp"
#include "pimdp/experiment.hpp"
#include "pimdp/instance_gen.hpp"
#include "pimdp/linear_solve.hpp"
#include "pimdp/mdp.hpp"
#include "pimdp/oracle.hpp"
#include "pimdp/policy_iteration.hpp"
#include "pimdp/rng.hpp"
#include "pimdp/scalar.hpp"
