//! Planar model of a passive perching claw: sizing, perched kinematics,
//! Hoberman leg force, joint statics, grasp prediction and biped gait.

pub mod design;
pub mod fourbar;
pub mod gait;
pub mod grasp;
pub mod hoberman;
pub mod output;
pub mod pose;
pub mod scenario;
pub mod statics;

pub type Vec2 = nalgebra::Vector2<f64>;

/// Standard gravity, m/s^2.
pub const G: f64 = 9.81;

pub(crate) fn unit(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

pub(crate) fn angle_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

/// Wrap to (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut w = a.rem_euclid(tau);
    if w > std::f64::consts::PI {
        w -= tau;
    }
    w
}

pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}
