#ifndef RMD_RMD_HPP_
#define RMD_RMD_HPP_

#include "rmd/batch.hpp"
#include "rmd/executor.hpp"
#include "rmd/geometry.hpp"
#include "rmd/goal.hpp"
#include "rmd/io.hpp"
#include "rmd/metrics.hpp"
#include "rmd/plan.hpp"
#include "rmd/plan_validation.hpp"
#include "rmd/planner.hpp"
#include "rmd/randomize.hpp"
#include "rmd/reward.hpp"
#include "rmd/scene.hpp"
#include "rmd/skeleton.hpp"

#endif  // RMD_RMD_HPP_
