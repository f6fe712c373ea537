#include "lfk/problem.hpp"

#include "lfk/errors.hpp"

namespace lfk {

void validate_problem(const ProblemSpec& spec) {
    validate_model(spec.model);
    validate_rate(spec.rate, spec.model);
    validate_data(spec.data);
    if (!(spec.horizon > 0.0)) throw ConfigError("horizon must be > 0");
}

} // namespace lfk
