#include "mrfe/gradcheck.hpp"

#include "mrfe/errors.hpp"

#include <cmath>

namespace mrfe::inline MRFE_PRECISION {

namespace {
double evaluate(const std::function<Tensor()>& loss) {
    NoGradGuard guard;
    const double v = loss().item();
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: loss is not finite");
    return v;
}
} // namespace

GradCheckResult finite_difference_check(const std::function<Tensor()>& loss, ParameterStore& params, double eps) {
    params.zero_grad();
    {
        Tensor l = loss();
        if (!std::isfinite(static_cast<double>(l.item()))) {
            throw NumericError("finite_difference_check: loss is not finite");
        }
        l.backward();
    }

    GradCheckResult result;
    for (auto& [name, tensor] : params) {
        const std::vector<Scalar> analytic(tensor.grad().begin(), tensor.grad().end());
        auto values = tensor.mutable_data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Scalar original = values[i];
            // The step actually taken after rounding to Scalar.
            const Scalar hi = static_cast<Scalar>(original + eps);
            const Scalar lo = static_cast<Scalar>(original - eps);
            values[i] = hi;
            const double up = evaluate(loss);
            values[i] = lo;
            const double down = evaluate(loss);
            values[i] = original;

            const double numeric = (up - down) / (double(hi) - double(lo));
            const double a = analytic[i];
            const double err = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-8);
            ++result.coordinates;
            if (result.worst_parameter.empty() || err > result.max_relative_error) {
                result.max_relative_error = err;
                result.worst_parameter = name;
                result.worst_index = i;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    params.zero_grad();
    return result;
}

} // namespace mrfe
