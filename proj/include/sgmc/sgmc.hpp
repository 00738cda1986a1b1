#pragma once
#include <sgmc/errors.hpp>
#include <sgmc/model.hpp>
#include <sgmc/optimality.hpp>
#include <sgmc/candidate.hpp>
#include <sgmc/sweep.hpp>
#include <sgmc/oracle.hpp>
#include <sgmc/elars.hpp>
#include <sgmc/io.hpp>
#include <sgmc/audit.hpp>
