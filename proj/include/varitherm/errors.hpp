#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace varitherm {

struct Trajectory;

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A state left the physically admissible domain. Integrators treat these as
/// recoverable: the step is rejected and retried with a smaller dt.
struct DomainError : Error {
    using Error::Error;
};

struct NonPositiveTemperature : DomainError {
    explicit NonPositiveTemperature(const std::string& msg = "temperature is not positive")
        : DomainError(msg) {}
};

struct NegativeMoles : DomainError {
    explicit NegativeMoles(const std::string& msg = "mole count is negative") : DomainError(msg) {}
};

struct NegativeVolume : DomainError {
    explicit NegativeVolume(const std::string& msg = "volume is not positive") : DomainError(msg) {}
};

struct NonPositiveDensity : DomainError {
    explicit NonPositiveDensity(const std::string& msg = "mass density is not positive")
        : DomainError(msg) {}
};

struct DomainViolation : DomainError {
    explicit DomainViolation(const std::string& msg = "state outside admissible box")
        : DomainError(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg = "dimension mismatch") : Error(msg) {}
};

struct SingularMassMatrix : Error {
    explicit SingularMassMatrix(const std::string& msg = "mass matrix is singular") : Error(msg) {}
};

struct SingularHeatCapacity : Error {
    explicit SingularHeatCapacity(const std::string& msg = "heat-capacity matrix is singular")
        : Error(msg) {}
};

struct AsymmetricConductivity : Error {
    explicit AsymmetricConductivity(const std::string& msg = "conductivity matrix is not symmetric")
        : Error(msg) {}
};

struct NegativeConductivity : Error {
    explicit NegativeConductivity(const std::string& msg = "conductivity coefficient is negative")
        : Error(msg) {}
};

struct StoichiometryMassViolation : Error {
    explicit StoichiometryMassViolation(const std::string& msg =
                                            "stoichiometry does not conserve mass")
        : Error(msg) {}
};

struct InvalidOnsager : Error {
    explicit InvalidOnsager(const std::string& msg = "invalid Onsager coefficient matrix")
        : Error(msg) {}
};

struct StepRejected : Error {
    explicit StepRejected(const std::string& msg = "integration step rejected") : Error(msg) {}
};

struct MaxStepsExceeded : Error {
    explicit MaxStepsExceeded(const std::string& msg = "maximum step count exceeded") : Error(msg) {}
};

struct InsufficientSamples : Error {
    explicit InsufficientSamples(const std::string& msg = "trajectory has too few samples")
        : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

/// Hard integration failure. Carries how far the run got; simulate() attaches
/// the trajectory up to the last valid sample.
struct IntegrationError : Error {
    double t_reached;
    std::shared_ptr<const Trajectory> partial;  // set by simulate()
    explicit IntegrationError(const std::string& msg, double t = 0.0)
        : Error(msg), t_reached(t) {}
};

}  // namespace varitherm
