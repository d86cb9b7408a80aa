#pragma once

#include <cstddef>
#include <cstdint>

namespace amalgam {

// Execution policy for the data-parallel kernels. Every kernel computes each
// output sample with a serial, fixed-order reduction, so both policies give
// bitwise-identical results; `serial` is the reference path.
enum class Exec { serial, parallel };

template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body)
{
    const auto count = static_cast<std::int64_t>(n);
    if (exec == Exec::serial) {
        for (std::int64_t i = 0; i < count; ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i)
        body(static_cast<std::size_t>(i));
}

} // namespace amalgam
