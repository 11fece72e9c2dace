// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evsched {

// Malformed input: bad files, invariant violations, out-of-range parameters.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Energy demand that cannot be met under the strict demand policy.
class InfeasibleDemandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Decoded solver output contradicts the model it came from.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace evsched
