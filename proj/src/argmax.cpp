#include "invmc/argmax.hpp"

namespace invmc {

ArgmaxResult argmax_control(const ControlProblem& problem, int n, Vec x, Vec i,
                            const std::function<double(Vec u, Vec i_next)>& continuation,
                            const ArgmaxOptions& options) {
    if (!continuation) {
        return argmax_control(problem, n, x, i, [](Vec, Vec) { return 0.0; }, options);
    }
    return argmax_control<const std::function<double(Vec, Vec)>&>(problem, n, x, i, continuation, options);
}

}  // namespace invmc
