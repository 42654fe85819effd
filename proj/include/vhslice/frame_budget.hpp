#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vhs {

struct FrameBudgetConfig {
    double budget_ms = 16.6;
    double ema_alpha = 0.2;
    std::vector<double> ladder{1.0, 0.5, 0.25};
    /// Step up once the EMA has stayed below this fraction of the budget for
    /// `step_up_streak` consecutive updates.
    double step_up_fraction = 0.6;
    std::uint32_t step_up_streak = 10;
    /// A step up that is undone within `step_up_streak` updates doubles the
    /// streak required for the next step up, capped at base * max_backoff.
    /// A step up that holds for `step_up_streak` updates resets it. 1 disables.
    std::uint32_t max_backoff = 16;
};

/// EMA-driven resolution ladder: steps down as soon as the smoothed frame time
/// exceeds the budget, steps back up only after a sustained streak of headroom.
class FrameBudgetController {
public:
    FrameBudgetController() : FrameBudgetController(FrameBudgetConfig{}) {}
    /// Throws std::domain_error on an empty ladder or out-of-range constants.
    explicit FrameBudgetController(FrameBudgetConfig config);

    /// Feeds one measured frame time and returns the scale for the next frame.
    /// Throws std::domain_error for negative or non-finite input.
    double update(double last_frame_ms);

    double scale() const { return config_.ladder[index_]; }
    std::size_t ladder_index() const { return index_; }
    double ema_ms() const { return ema_ms_; }
    bool has_samples() const { return has_samples_; }
    std::uint32_t streak() const { return streak_; }
    std::uint32_t required_streak() const { return required_streak_; }
    const FrameBudgetConfig& config() const { return config_; }

private:
    FrameBudgetConfig config_;
    std::size_t index_ = 0;
    double ema_ms_ = 0.0;
    bool has_samples_ = false;
    std::uint32_t streak_ = 0;
    std::uint32_t required_streak_ = 0;
    // Updates since the last step up while it is still on probation; 0 = none pending.
    std::uint32_t probation_ = 0;
};

} // namespace vhs
