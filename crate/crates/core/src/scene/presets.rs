//! Bundled environments.

use super::{Aabb, Scene, SolidBox};
use crate::geometry::{Pose6D, StampedPose, Vec3};
use crate::scalar::Real;

const WALL: f64 = 0.2;

fn wall_boxes<T: Real>(width: f64, depth: f64, height: f64) -> Vec<SolidBox<T>> {
    let b = |x0: f64, y0: f64, z0: f64, x1: f64, y1: f64, z1: f64| {
        SolidBox::from_corners(
            Vec3::new(T::lit(x0), T::lit(y0), T::lit(z0)),
            Vec3::new(T::lit(x1), T::lit(y1), T::lit(z1)),
        )
    };
    let (w, d, h, t) = (width, depth, height, WALL);
    vec![
        b(-t, -t, -t, w + t, d + t, 0.0),
        b(-t, -t, h, w + t, d + t, h + t),
        b(-t, -t, 0.0, 0.0, d + t, h),
        b(w, -t, 0.0, w + t, d + t, h),
        b(0.0, -t, 0.0, w, 0.0, h),
        b(0.0, d, 0.0, w, d + t, h),
    ]
}

fn room_bounds<T: Real>(width: f64, depth: f64, height: f64) -> Aabb<T> {
    Aabb::new(
        Vec3::new(T::lit(-WALL), T::lit(-WALL), T::lit(-WALL)),
        Vec3::new(
            T::lit(width + WALL),
            T::lit(depth + WALL),
            T::lit(height + WALL),
        ),
    )
}

/// Empty closed room with interior `[0, width] x [0, depth] x [0, height]` and 0.2 m
/// thick floor, ceiling and walls.
pub fn closed_room<T: Real>(width: f64, depth: f64, height: f64) -> Scene<T> {
    Scene::new(
        wall_boxes(width, depth, height),
        room_bounds(width, depth, height),
    )
    .expect("closed room is valid")
}

/// Office-like 20 m x 10 m x 3 m room: a partition wall, a pillar, furniture and a
/// ramp approximated by stacked steps. The layout has no rotational or mirror
/// symmetry so that global localization has a unique answer.
pub fn office_scene<T: Real>() -> Scene<T> {
    let (w, d, h) = (20.0, 10.0, 3.0);
    let mut solids = wall_boxes::<T>(w, d, h);
    let b = |x0: f64, y0: f64, z0: f64, x1: f64, y1: f64, z1: f64| {
        SolidBox::from_corners(
            Vec3::new(T::lit(x0), T::lit(y0), T::lit(z0)),
            Vec3::new(T::lit(x1), T::lit(y1), T::lit(z1)),
        )
    };
    // partition from the south wall
    solids.push(b(12.0, 0.0, 0.0, 12.15, 6.0, h));
    // pillar
    solids.push(b(5.0, 3.0, 0.0, 5.4, 3.4, h));
    // desks
    solids.push(b(2.0, 7.6, 0.0, 3.6, 8.4, 0.75));
    solids.push(b(6.5, 8.8, 0.0, 8.5, 10.0, 0.75));
    // cabinets
    solids.push(b(17.4, 7.0, 0.0, 18.0, 10.0, 2.0));
    solids.push(b(0.0, 0.0, 0.0, 1.2, 0.5, 1.8));
    // crate
    solids.push(b(14.5, 2.5, 0.0, 15.5, 3.5, 1.0));
    // ramp along the south wall: 6 steps of 0.4 m rising 0.08 m each
    for i in 0..6 {
        let x0 = 7.0 + 0.4 * i as f64;
        solids.push(b(x0, 0.0, 0.0, 9.8, 1.5, 0.08 * (i + 1) as f64));
    }
    // low shelf in the east section
    solids.push(b(19.4, 0.0, 0.0, 20.0, 4.0, 1.2));
    Scene::new(solids, room_bounds(w, d, h)).expect("office scene is valid")
}

/// Sensor trajectory through the office scene: starts near the room center at 1 m
/// height and arcs north-east past the end of the partition, 0.15 m per step.
pub fn office_trajectory<T: Real>(steps: usize) -> Vec<StampedPose<T>> {
    let mut x = 9.0;
    let mut y = 5.0;
    let mut yaw: f64 = 0.8;
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        out.push(StampedPose {
            stamp: T::from_usize_lossy(k),
            pose: Pose6D::new(
                T::lit(x),
                T::lit(y),
                T::lit(1.0),
                T::zero(),
                T::zero(),
                T::lit(yaw),
            ),
        });
        x += 0.15 * yaw.cos();
        y += 0.15 * yaw.sin();
        yaw -= 0.015;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_stays_clear_of_obstacles() {
        let s = office_scene::<f64>();
        for p in office_trajectory::<f64>(45) {
            assert!(s.sdf(p.pose.translation()) > 0.5, "{:?}", p.pose);
        }
    }

    #[test]
    fn rooms_are_closed() {
        let s = closed_room::<f64>(4.0, 3.0, 2.5);
        assert_eq!(s.solids().len(), 6);
        assert!(s.sdf(Vec3::new(2.0, 1.5, 1.0)) > 0.0);
        assert!(s.sdf(Vec3::new(-0.1, 1.5, 1.0)) < 0.0);
    }
}
