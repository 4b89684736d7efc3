#pragma once

#include <stdexcept>
#include <string>

namespace relvac {

/// Reasons a right-hand-side evaluation or a run can fail. `none` means healthy.
enum class fault {
    none,
    superluminal,        // u^2+v^2+w^2 >= c^2 at some node
    positivity_loss,     // Lambda_i <= 0 or p'(rho) >= c^2
    density_breakdown,   // relativistic density bracket <= 0
    shell_crossing,      // r_x <= 0 (or r <= 0 away from the axis)
    nan_detected,
    cfl_violation,
};

inline const char* fault_name(fault f) {
    switch (f) {
        case fault::none: return "none";
        case fault::superluminal: return "superluminal";
        case fault::positivity_loss: return "positivity-loss";
        case fault::density_breakdown: return "density-breakdown";
        case fault::shell_crossing: return "shell-crossing";
        case fault::nan_detected: return "nan-detected";
        case fault::cfl_violation: return "cfl-violation";
    }
    return "unknown";
}

inline fault fault_from_name(const std::string& s) {
    for (fault f : {fault::none, fault::superluminal, fault::positivity_loss,
                    fault::density_breakdown, fault::shell_crossing,
                    fault::nan_detected, fault::cfl_violation})
        if (s == fault_name(f))
            return f;
    throw std::invalid_argument("unknown fault name: " + s);
}

struct solver_error : std::runtime_error {
    fault kind;
    int node;
    double time;

    solver_error(fault k, int node_, double t, const std::string& msg)
        : std::runtime_error(std::string(fault_name(k)) + " at node " +
                             std::to_string(node_) + ", t=" + std::to_string(t) +
                             ": " + msg),
          kind(k), node(node_), time(t) {}
};

}  // namespace relvac
