#pragma once

#include <stdexcept>

namespace rmk {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};
struct DegenerateInputError : std::domain_error {
    using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rmk
