#include "vhslice/frame_budget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vhs {

FrameBudgetController::FrameBudgetController(FrameBudgetConfig config) : config_(std::move(config))
{
    if (config_.ladder.empty()) {
        throw std::domain_error("frame budget: ladder must not be empty");
    }
    if (!(config_.budget_ms > 0) || !(config_.ema_alpha > 0) || config_.ema_alpha > 1) {
        throw std::domain_error("frame budget: budget must be > 0 and alpha in (0, 1]");
    }
    if (config_.step_up_fraction < 0 || config_.step_up_fraction > 1 || config_.step_up_streak == 0 ||
        config_.max_backoff == 0) {
        throw std::domain_error("frame budget: invalid step-up parameters");
    }
    required_streak_ = config_.step_up_streak;
}

double FrameBudgetController::update(double last_frame_ms)
{
    if (!(last_frame_ms >= 0) || !std::isfinite(last_frame_ms)) {
        throw std::domain_error("frame budget: frame time must be a finite value >= 0, got " +
                                std::to_string(last_frame_ms));
    }
    if (!has_samples_) {
        ema_ms_ = last_frame_ms;
        has_samples_ = true;
    } else {
        ema_ms_ = config_.ema_alpha * last_frame_ms + (1.0 - config_.ema_alpha) * ema_ms_;
    }

    const std::size_t top = config_.ladder.size() - 1;
    const std::uint32_t cap = config_.step_up_streak * config_.max_backoff;

    if (ema_ms_ > config_.budget_ms) {
        if (index_ < top) {
            ++index_;
            if (probation_ > 0) {
                required_streak_ = std::min(required_streak_ * 2, cap);
            }
        }
        probation_ = 0;
        streak_ = 0;
    } else if (ema_ms_ < config_.step_up_fraction * config_.budget_ms) {
        if (probation_ > 0 && ++probation_ > config_.step_up_streak) {
            probation_ = 0;
            required_streak_ = config_.step_up_streak;
        }
        ++streak_;
        if (streak_ >= required_streak_) {
            if (index_ > 0) {
                --index_;
                probation_ = 1;
            }
            streak_ = 0;
        }
    } else {
        if (probation_ > 0 && ++probation_ > config_.step_up_streak) {
            probation_ = 0;
            required_streak_ = config_.step_up_streak;
        }
        streak_ = 0;
    }
    return scale();
}

} // namespace vhs
