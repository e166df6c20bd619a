//! Small vector helpers shared by the geometry modules.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Unnormalized triangle normal (twice the area vector), CCW orientation.
#[inline]
pub fn triangle_cross(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (b - a).cross(&(c - a))
}

#[inline]
pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * triangle_cross(a, b, c).norm()
}

#[inline]
pub fn centroid3(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (a + b + c) / 3.0
}

/// Rotation by `angle` radians about the unit `axis` (Rodrigues).
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let k = Mat3::new(
        0.0, -axis.z, axis.y, //
        axis.z, 0.0, -axis.x, //
        -axis.y, axis.x, 0.0,
    );
    Mat3::identity() + k * s + k * k * (1.0 - c)
}

/// Minimal rotation taking unit vector `from` onto unit vector `to`.
///
/// Antiparallel inputs rotate by pi about an axis perpendicular to `from`
/// chosen from the coordinate axis least aligned with it.
pub fn rotation_between(from: &Vec3, to: &Vec3) -> Mat3 {
    let cross = from.cross(to);
    let sin = cross.norm();
    let cos = from.dot(to).clamp(-1.0, 1.0);
    if sin < 1e-15 {
        if cos > 0.0 {
            return Mat3::identity();
        }
        let helper = least_aligned_axis(from);
        let axis = from.cross(&helper).normalize();
        return axis_angle(&axis, std::f64::consts::PI);
    }
    axis_angle(&(cross / sin), sin.atan2(cos))
}

fn least_aligned_axis(v: &Vec3) -> Vec3 {
    let a = v.map(f64::abs);
    if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    }
}

pub fn rot_x_pi() -> Mat3 {
    Mat3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0)
}

pub fn rot_z_pi() -> Mat3 {
    Mat3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Exact second moment `∫ x xᵀ dA` over a triangle.
pub fn triangle_second_moment(a: &Vec3, b: &Vec3, c: &Vec3) -> Mat3 {
    let area = triangle_area(a, b, c);
    let s = a + b + c;
    (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose())
        * (area / 12.0)
}

/// Exact third moment `∫ (d·x)³ dA` over a triangle along direction `d`.
pub fn triangle_third_moment(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let area = triangle_area(a, b, c);
    let (p, q, r) = (a.dot(d), b.dot(d), c.dot(d));
    let cubes = p * p * p + q * q * q + r * r * r;
    let mixed = p * p * (q + r) + q * q * (p + r) + r * r * (p + q);
    area * (cubes + mixed + p * q * r) / 10.0
}

/// A random rotation matrix drawn uniformly from SO(3).
pub fn random_rotation<R: rand::Rng + ?Sized>(rng: &mut R) -> Mat3 {
    // Uniform unit quaternion (Shoemake).
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let u3: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin());
    nalgebra::UnitQuaternion::from_quaternion(q)
        .to_rotation_matrix()
        .into_inner()
}
