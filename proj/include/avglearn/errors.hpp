#pragma once

#include <stdexcept>
#include <string>

namespace avglearn {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error {
    using Error::Error;
};
struct NotSubstochastic : Error {
    using Error::Error;
};
struct NotProperSubstochastic : Error {
    using Error::Error;
};
struct DimensionTooLarge : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct NotAnScc : Error {
    using Error::Error;
};
struct InvalidScenario : Error {
    using Error::Error;
};
struct InvalidInput : Error {
    using Error::Error;
};
struct InfeasibleLearner : Error {
    using Error::Error;
};
struct Unsupported : Error {
    using Error::Error;
};
struct NotApplicable : Error {
    using Error::Error;
};
struct SingularEquilibrium : Error {
    using Error::Error;
};

}  // namespace avglearn
