#pragma once

// Synthetic gaze-trace builders shared by the unit and acceptance suites.

#include <cstdint>
#include <string>
#include <vector>

#include "fovcast/dataset.hpp"
#include "fovcast/geometry.hpp"

namespace fovcast::testsupport {

/** theta(t) and phi(t) in degrees, sampled at frame centers (t in seconds). */
struct AnglePath {
    double theta0 = 0.0, phi0 = 0.0;
    double theta_rate = 0.0, phi_rate = 0.0;     // deg/s linear drift
    double theta_amp = 0.0, theta_period = 8.0;  // optional sinusoidal theta term
    double theta_phase = 0.0;

    double theta_at(double t) const;
    double phi_at(double t) const;
};

/** Frame-center directions for `seconds` seconds at `fps`. */
std::vector<UnitVec3> sample_path(const AnglePath& path, int seconds, int fps);

/** A dense session record following `path`, frames indexed 0..seconds*fps-1. */
SessionRecord make_session(const std::string& video_id, const std::string& user_id,
                           const AnglePath& path, int seconds, int fps);

/**
 * A cohort of users all following one latent camera script: a longitude
 * velocity that jumps to a new random value every few seconds plus a slow
 * latitude sway. Each user adds a constant offset and per-frame jitter, so
 * any user's future is far better explained by the others' trajectories than
 * by extrapolating the user's own past across a script turn.
 */
struct CohortSpec {
    int n_users = 6;
    int seconds = 40;
    int fps = 5;
    double turn_min_s = 3.0;       // seconds between velocity changes
    double turn_max_s = 8.0;
    double vel_max_deg_s = 25.0;   // longitude velocity drawn in +-this
    double offset_deg = 4.0;       // per-user constant offset STD
    double jitter_deg = 1.0;       // per-frame gaze noise STD
    double phi_amp_deg = 12.0;     // latitude sway amplitude
};

std::vector<SessionRecord> make_script_cohort(const std::string& video_id, const CohortSpec& spec,
                                              Rng& rng);

}  // namespace fovcast::testsupport
