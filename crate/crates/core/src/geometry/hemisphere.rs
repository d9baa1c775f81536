use std::f64::consts::PI;

use super::{Direction, Vec3};

const SLACK: f64 = 1e-12;

/// True iff some closed hemisphere `{u : u·v >= 0}` contains every direction.
///
/// 2D: the directions fail to fit in a closed half-circle iff the largest
/// angular gap between consecutive sorted angles is below π. 3D: if the
/// feasible cone `{v : u_j·v >= 0}` is non-trivial it has an extreme ray (or a
/// lineality direction) orthogonal to two independent atoms, so it suffices to
/// test `±u_i × u_j` over all pairs.
pub fn in_closed_hemisphere(dim: usize, dirs: &[Direction]) -> bool {
    if dirs.len() <= dim {
        return true;
    }
    match dim {
        2 => {
            let mut angles: Vec<f64> = dirs.iter().map(|d| d.vec().y.atan2(d.vec().x)).collect();
            angles.sort_by(f64::total_cmp);
            let mut gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
            for w in angles.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            gap >= PI - SLACK
        }
        _ => {
            let m = dirs.len();
            let fits = |v: &Vec3| dirs.iter().all(|d| d.dot(v) >= -SLACK);
            let mut any_independent = false;
            for i in 0..m {
                for j in (i + 1)..m {
                    let c = dirs[i].vec().cross(dirs[j].vec());
                    let norm = c.norm();
                    if norm < 1e-12 {
                        continue;
                    }
                    any_independent = true;
                    let v = c / norm;
                    if fits(&v) || fits(&-v) {
                        return true;
                    }
                }
            }
            !any_independent
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64, y: f64, z: f64) -> Direction {
        Direction::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn planar_cases() {
        let cross = [d(1.0, 0.0, 0.0), d(-1.0, 0.0, 0.0), d(0.0, 1.0, 0.0), d(0.0, -1.0, 0.0)];
        assert!(!in_closed_hemisphere(2, &cross));
        assert!(in_closed_hemisphere(2, &[d(1.0, 0.0, 0.0), d(0.0, 1.0, 0.0)]));
        // gaps 90°, 135°, 135°
        assert!(!in_closed_hemisphere(2, &[d(1.0, 0.0, 0.0), d(0.0, 1.0, 0.0), d(-1.0, -1.0, 0.0)]));
        // exactly a closed half-circle
        assert!(in_closed_hemisphere(2, &[d(1.0, 0.0, 0.0), d(0.0, 1.0, 0.0), d(-1.0, 0.0, 0.0)]));
    }

    #[test]
    fn spatial_cases() {
        let mut oct = Vec::new();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = 1.0;
            oct.push(Direction::new(e).unwrap());
            oct.push(Direction::new(-e).unwrap());
        }
        assert!(!in_closed_hemisphere(3, &oct));
        // equator only: contained in both closed hemispheres z >= 0 and z <= 0
        let equator: Vec<Direction> = oct[..4].to_vec();
        assert!(in_closed_hemisphere(3, &equator));
        // upper cap plus one below-horizon point still inside a tilted hemisphere
        let tet = [d(1.0, 1.0, 1.0), d(1.0, -1.0, -1.0), d(-1.0, 1.0, -1.0), d(-1.0, -1.0, 1.0)];
        assert!(!in_closed_hemisphere(3, &tet));
        assert!(in_closed_hemisphere(3, &tet[..3]));
    }
}
