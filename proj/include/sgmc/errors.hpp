#pragma once
#include <stdexcept>
#include <string>

namespace sgmc {

/// Base class of every exception thrown by the library.
class sgmc_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent problem data (dimension mismatch, rho out of range, ...).
class input_error : public sgmc_error
{
public:
    using sgmc_error::sgmc_error;
};

/// [s]_E is not in Col(C_E^T); the candidate zone of s is empty.
class incompatible_indicator : public sgmc_error
{
public:
    using sgmc_error::sgmc_error;
};

/// Iterative solver stopped before reaching its tolerance.
class convergence_error : public sgmc_error
{
public:
    convergence_error(const std::string& what, double achieved)
        : sgmc_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }
private:
    double achieved_;
};

/// A precondition on the parameter point failed (e.g. point not inside the claimed zone).
class precondition_error : public sgmc_error
{
public:
    using sgmc_error::sgmc_error;
};

} // namespace sgmc
