#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "sill/errors.hpp"

namespace sill {

/// A named right-hand side xdot = f(x) with its parameter set. Copyable;
/// `eval` must be pure. `clamp_events` counts evaluations where the field had
/// to clamp an out-of-range state (used by the toggle-switch benchmark when
/// integration slightly undershoots zero).
struct VectorField {
    std::string name;
    int state_dim = 0;
    std::map<std::string, double> params;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    std::shared_ptr<std::atomic<std::uint64_t>> clamp_events;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        if (static_cast<int>(x.size()) != state_dim) {
            throw ContractError("VectorField '" + name + "': state dimension mismatch");
        }
        return eval(x);
    }
};

} // namespace sill
