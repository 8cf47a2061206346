#pragma once

#include <optional>
#include <utility>

#include "edgeplan/bocpd.hpp"
#include "edgeplan/config_map.hpp"

namespace edgeplan {

struct OnlineStep {
    Strategy strategy;
    bool switched = false;
    double state_kbps = 0.0;
    bool state_changed = false;
};

// Runtime strategy selection: keep the current strategy until the detector
// declares a bandwidth state transition, then adopt the mapped strategy of
// the new state. The first sample always adopts a strategy.
class OnlineOptimizer {
  public:
    OnlineOptimizer(ConfigurationMap map, DetectorConfig detector_config = {})
        : map_(std::move(map)), detector_(std::move(detector_config)) {
        if (map_.entries.empty())
            throw validation_error("online optimizer needs a non-empty configuration map");
    }

    OnlineStep step(double sample_kbps) {
        DetectorObservation obs = detector_.observe(sample_kbps);
        OnlineStep out;
        out.state_kbps = obs.state_kbps;
        out.state_changed = obs.changed;
        if (!current_ || obs.changed) {
            const MapEntry& entry = lookup(map_, obs.state_kbps);
            current_ = entry.strategy;
            last_state_kbps_ = obs.state_kbps;
            out.switched = true;
        }
        out.strategy = *current_;
        return out;
    }

    const Strategy& current_strategy() const {
        if (!current_) throw validation_error("no strategy adopted yet; feed a sample first");
        return *current_;
    }

    // Bandwidth state that produced the current strategy.
    double last_state_kbps() const {
        if (!current_) throw validation_error("no strategy adopted yet; feed a sample first");
        return last_state_kbps_;
    }

    const ConfigurationMap& map() const { return map_; }
    ChangepointDetector& detector() { return detector_; }

  private:
    ConfigurationMap map_;
    ChangepointDetector detector_;
    std::optional<Strategy> current_;
    double last_state_kbps_ = 0.0;
};

}  // namespace edgeplan
