#pragma once

#include <stdexcept>
#include <string>

namespace ddes {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition or invariant violated by the caller (dimension mismatch, bad range).
struct ContractError : Error {
    using Error::Error;
};

// Scenario or config file rejected.
struct ConfigError : Error {
    using Error::Error;
};

// Delay lookup outside the retained history span.
struct HistoryUnderrun : Error {
    using Error::Error;
};

// Sampled semigroup norms do not decay over the fitting horizon.
struct NotStableError : Error {
    using Error::Error;
};

// Scenario construction failure (e.g. eigenvalue bracketing).
struct BuildError : Error {
    using Error::Error;
};

// Decay-rate fit impossible (zero/NaN norms in the window, too few samples).
struct FitError : Error {
    using Error::Error;
};

} // namespace ddes
