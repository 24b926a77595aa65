#pragma once

#include <cmath>
#include <numbers>

#include "eap/common.hpp"
#include "eap/env/params.hpp"
#include "eap/rng.hpp"

namespace eap {

inline constexpr double kGravity = 9.81;

inline double wrap_angle(double a) {  // to (-pi, pi]
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a <= 0.0) a += two_pi;
    return a - std::numbers::pi;
}

struct StepResult {
    Vec state;
    double reward = 0.0;
    bool done = false;
    bool action_clipped = false;
};

namespace dynamics {

// Coulomb friction smoothed with tanh(v / 0.01) to keep the vector field
// continuous for the integrator.
inline double smooth_sign(double v) { return std::tanh(v / 0.01); }

// Cart-pole accelerations. Flat param order: pole_length, pole_mass,
// cart_mass, rot_damping, rot_friction, trans_friction. The joint damping
// and Coulomb term act at the pivot, the viscous friction on the cart.
inline void cartpole_accel(const Vec& q, double force, const Vec& p, double& xdd, double& thdd) {
    const double length = p[0], m_pole = p[1], m_cart = p[2];
    const double b_rot = p[3], mu_rot = p[4], mu_trans = p[5];
    const double l = 0.5 * length;  // pivot-to-CoM distance
    const double th = q[2], xd = q[1], thd = q[3];
    const double sin_th = std::sin(th), cos_th = std::cos(th);

    const double total_m = m_cart + m_pole;
    const double inertia = (4.0 / 3.0) * m_pole * l * l;  // rod about pivot
    const double tau_f = -b_rot * thd - mu_rot * m_pole * kGravity * l * smooth_sign(thd);
    const double f_eff = force - mu_trans * xd;

    // [ total_m      m_p l cos ] [xdd ]   [ f_eff + m_p l thd^2 sin ]
    // [ m_p l cos    inertia   ] [thdd] = [ tau_f + m_p g l sin     ]
    const double a12 = m_pole * l * cos_th;
    const double r1 = f_eff + m_pole * l * thd * thd * sin_th;
    const double r2 = tau_f + m_pole * kGravity * l * sin_th;
    const double det = total_m * inertia - a12 * a12;
    xdd = (r1 * inertia - r2 * a12) / det;
    thdd = (r2 * total_m - r1 * a12) / det;
}

// Pendulum (theta measured from upright). Flat params: pole_length,
// pole_mass, joint_damping, dry_friction, gravity_scale.
inline double pendulum_accel(double th, double thd, double torque, const Vec& p) {
    const double length = p[0], mass = p[1];
    const double b = p[2], mu_dry = p[3], g = kGravity * p[4];
    const double inertia = mass * length * length / 3.0;  // rod about end pivot
    const double tau = torque - b * thd - mu_dry * mass * g * 0.5 * length * smooth_sign(thd) +
                       mass * g * 0.5 * length * std::sin(th);
    return tau / inertia;
}

// 1-D spring-leg hopper. Flat params: body_mass, rest_length, spring_k,
// leg_damping, gravity_scale. Actuator force acts along the leg in stance.
inline double hopper_accel(double z, double zd, double force, const Vec& p) {
    const double mass = p[0], rest = p[1], k = p[2], c = p[3], g = kGravity * p[4];
    double acc = -g;
    if (z < rest) acc += (k * (rest - z) - c * zd + force) / mass;
    return acc;
}

}  // namespace dynamics

// A stateful simulator bound to one DynamicsParams. Integration is
// semi-implicit Euler over `sub_steps` equal sub-steps per control step.
class EnvInstance {
public:
    static constexpr int kDefaultSubSteps = 4;
    static constexpr double kCartPoleAngleLimit = 12.0 * std::numbers::pi / 180.0;
    static constexpr double kCartPoleTrackLimit = 2.4;
    static constexpr double kPendulumSpeedLimit = 8.0;

    EnvInstance(EnvDescriptor descriptor, DynamicsParams params, std::uint64_t seed,
                int sub_steps = kDefaultSubSteps)
        : desc_(std::move(descriptor)),
          params_(std::move(params)),
          flat_(desc_.flatten(params_)),
          rng_(seed),
          sub_steps_(sub_steps) {
        reset();
    }

    const EnvDescriptor& descriptor() const { return desc_; }
    const DynamicsParams& params() const { return params_; }
    const Vec& flat_params() const { return flat_; }
    int step_count() const { return step_count_; }
    bool done() const { return done_; }
    const Vec& internal_state() const { return q_; }

    Vec reset() {
        q_ = draw_initial_state();
        step_count_ = 0;
        done_ = false;
        draw_perturbation();
        return observe();
    }

    // Teleports the simulator to an exact (observed) state; episode
    // bookkeeping restarts so the state can be rolled from scratch.
    void set_state(const Vec& obs) {
        require(static_cast<int>(obs.size()) == desc_.state_dim, "set_state: wrong dimension");
        switch (desc_.task) {
            case TaskId::Pendulum:
                q_ = {std::atan2(obs[1], obs[0]), obs[2]};
                break;
            default:
                q_ = obs;
        }
        step_count_ = 0;
        done_ = false;
    }

    Vec observe() const {
        if (desc_.task == TaskId::Pendulum) return {std::cos(q_[0]), std::sin(q_[0]), q_[1]};
        return q_;
    }

    // Full episode semantics: reward, termination, scheduled perturbation.
    StepResult step(const Vec& action) {
        if (done_) throw ContractViolation("step: episode is done; call reset()");
        StepResult out;
        const double a = clip_action(action, out.action_clipped);
        const Vec pre = q_;

        double extra = 0.0;
        if (perturb_active()) extra = perturb_force_;
        integrate(a, extra);
        ++step_count_;

        switch (desc_.task) {
            case TaskId::CartPole: {
                out.reward = 1.0;
                const bool fell = std::fabs(q_[2]) > kCartPoleAngleLimit ||
                                  std::fabs(q_[0]) > kCartPoleTrackLimit;
                done_ = fell || step_count_ >= desc_.max_steps;
                break;
            }
            case TaskId::Pendulum: {
                const double th = wrap_angle(pre[0]);
                out.reward = -(th * th + 0.1 * pre[1] * pre[1] + 0.001 * a * a);
                done_ = step_count_ >= desc_.max_steps;
                break;
            }
            case TaskId::Hopper: {
                const double target = flat_[1] + 0.2;
                out.reward = -(q_[0] - target) * (q_[0] - target) - 1e-4 * a * a;
                done_ = q_[0] < 0.05 || step_count_ >= desc_.max_steps;
                break;
            }
        }
        out.state = observe();
        out.done = done_;
        return out;
    }

    // Pure transition function: integrates one control step with no reward,
    // termination, or perturbation. Used for paired error rollouts.
    Vec simulate_step(const Vec& action) {
        bool clipped = false;
        const double a = clip_action(action, clipped);
        integrate(a, 0.0);
        return observe();
    }

private:
    double clip_action(const Vec& action, bool& clipped) const {
        require(static_cast<int>(action.size()) == desc_.action_dim, "step: wrong action dimension");
        const Interval& b = desc_.action_bounds[0];
        const double a = clamp(action[0], b.lo, b.hi);
        clipped = a != action[0];
        return a;
    }

    void integrate(double a, double extra_force) {
        const double h = desc_.dt / sub_steps_;
        for (int i = 0; i < sub_steps_; ++i) {
            switch (desc_.task) {
                case TaskId::CartPole: {
                    double xdd = 0.0, thdd = 0.0;
                    dynamics::cartpole_accel(q_, a + extra_force, flat_, xdd, thdd);
                    q_[1] += h * xdd;
                    q_[3] += h * thdd;
                    q_[0] += h * q_[1];
                    q_[2] += h * q_[3];
                    break;
                }
                case TaskId::Pendulum: {
                    const double thdd = dynamics::pendulum_accel(q_[0], q_[1], a + extra_force, flat_);
                    q_[1] = clamp(q_[1] + h * thdd, -kPendulumSpeedLimit, kPendulumSpeedLimit);
                    q_[0] += h * q_[1];
                    break;
                }
                case TaskId::Hopper: {
                    const double zdd = dynamics::hopper_accel(q_[0], q_[1], a + extra_force, flat_);
                    q_[1] += h * zdd;
                    q_[0] += h * q_[1];
                    break;
                }
            }
        }
    }

    Vec draw_initial_state() {
        switch (desc_.task) {
            case TaskId::CartPole: {
                Vec q(4);
                for (auto& v : q) v = rng_.uniform(-0.05, 0.05);
                return q;
            }
            case TaskId::Pendulum:
                return {rng_.uniform(std::numbers::pi - 0.1, std::numbers::pi + 0.1), 0.0};
            case TaskId::Hopper:
                return {flat_[1] + rng_.uniform(0.0, 0.1), 0.0};
        }
        return {};
    }

    void draw_perturbation() {
        perturb_start_ = -1;
        perturb_force_ = 0.0;
        if (!desc_.perturbation || desc_.perturbation->duration_steps <= 0) return;
        const auto& ps = *desc_.perturbation;
        const int latest = desc_.max_steps - ps.duration_steps;
        perturb_start_ = rng_.uniform_int(latest > 0 ? latest : 1);
        const double sign = rng_.uniform() < 0.5 ? -1.0 : 1.0;
        perturb_force_ = sign * rng_.uniform(ps.magnitude);
    }

    bool perturb_active() const {
        return perturb_start_ >= 0 && step_count_ >= perturb_start_ &&
               step_count_ < perturb_start_ + desc_.perturbation->duration_steps;
    }

    EnvDescriptor desc_;
    DynamicsParams params_;
    Vec flat_;
    RngStream rng_;
    int sub_steps_;
    Vec q_;
    int step_count_ = 0;
    bool done_ = false;
    int perturb_start_ = -1;
    double perturb_force_ = 0.0;
};

}  // namespace eap
