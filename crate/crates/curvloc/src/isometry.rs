//! Equivalence of corank-1 2-jets under rigid motions: source changes of
//! coordinates paired with linear isometries of the target. For the open
//! orbit the decision procedure reduces both jets to the isometric
//! prenormal shape, compares the thirteen remaining coefficients under the
//! sixteen admissible sign relations, and produces the normal-space
//! isometries carrying one curvature locus onto the other.

use thiserror::Error;

use crate::classify::{reduce_isometric_prenormal, Orbit, PrenormalForm};
use crate::germ::{GermError, MapGerm};

#[derive(Debug, Error)]
pub enum IsometryError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("decision procedure only covers the open orbit; got {0}")]
    UnsupportedOrbit(Orbit),
}

/// Names of the thirteen free coefficients of the prenormal shape
/// (x, y, a1 x^2 + a3 y^2 + xz + a6 yz,
///        b1 x^2 + b2 xy + b3 y^2 + b6 yz,
///        c1 x^2 + c2 xy + c3 y^2 + c4 z^2 + c5 xz + c6 yz).
pub const CASE_A_COEFF_NAMES: [&str; 13] = [
    "a1", "a3", "a6", "b1", "b2", "b3", "b6", "c1", "c2", "c3", "c4", "c5", "c6",
];

/// One admissible solution of the coefficient-matching system: source
/// signs (d, h, l) on (x, y, z), diagonal target signs, and the induced
/// sign relation on the thirteen coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsometrySolution {
    pub d: i32,
    pub h: i32,
    pub l: i32,
    /// Target diagonal (a11, a22, a33, a44, a55); a33 = d*l and a55 = +1
    /// are forced, a44 is free.
    pub target_signs: [i32; 5],
    /// Componentwise multipliers for the coefficient tuple.
    pub relation: [i32; 13],
}

impl IsometrySolution {
    fn from_params(d: i32, h: i32, l: i32, a44: i32) -> Self {
        let dl = d * l;
        let dh = d * h;
        let hl = h * l;
        IsometrySolution {
            d,
            h,
            l,
            target_signs: [d, h, dl, a44, 1],
            relation: [
                dl,       // a1
                dl,       // a3
                dh,       // a6
                a44,      // b1
                a44 * dh, // b2
                a44,      // b3
                a44 * hl, // b6
                1,        // c1
                dh,       // c2
                1,        // c3
                1,        // c4
                dl,       // c5
                hl,       // c6
            ],
        }
    }

    pub fn apply(&self, t: &[f64; 13]) -> [f64; 13] {
        std::array::from_fn(|i| self.relation[i] as f64 * t[i])
    }
}

/// The sixteen solutions, indexed by the sign choices
/// (d, h, l, a44) in {+1, -1}^4 (d slowest). Index 0 is the identity.
pub fn sixteen_solutions() -> Vec<IsometrySolution> {
    let mut out = Vec::with_capacity(16);
    for d in [1, -1] {
        for h in [1, -1] {
            for l in [1, -1] {
                for a44 in [1, -1] {
                    out.push(IsometrySolution::from_params(d, h, l, a44));
                }
            }
        }
    }
    out
}

/// Extract the thirteen-coefficient tuple from an open-orbit prenormal
/// form (rows ordered x^2, xy, y^2, z^2, xz, yz).
pub fn case_a_tuple(p: &PrenormalForm) -> Option<[f64; 13]> {
    if p.orbit != Orbit::XzYzZ2 {
        return None;
    }
    let r = &p.rows;
    Some([
        r[0][0], r[0][2], r[0][5], r[1][0], r[1][1], r[1][2], r[1][5], r[2][0], r[2][1], r[2][2],
        r[2][3], r[2][4], r[2][5],
    ])
}

#[derive(Debug, Clone)]
pub struct EquivalenceWitness {
    pub solution_index: usize,
    pub source_signs: [i32; 3],
    pub target_signs: [i32; 5],
}

#[derive(Debug, Clone)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub witness: Option<EquivalenceWitness>,
    /// Name of a coefficient that is invariant under all sixteen relations
    /// yet differs between the two reduced tuples; decisive when present.
    pub certificate: Option<&'static str>,
    pub reduced_a: [f64; 13],
    pub reduced_b: [f64; 13],
    /// Smallest over the sixteen relations of the largest per-coefficient
    /// residual.
    pub max_residual: f64,
}

const COEFF_TOL: f64 = 1e-9;

fn tuple_scale(a: &[f64; 13], b: &[f64; 13]) -> f64 {
    a.iter()
        .chain(b.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Decide whether two open-orbit germs are equivalent under source
/// changes of coordinates plus a linear isometry of the target.
pub fn check_jet_isometry_equivalence(
    ga: &MapGerm,
    gb: &MapGerm,
) -> Result<EquivalenceVerdict, IsometryError> {
    let pa = reduce_isometric_prenormal(ga)?;
    let pb = reduce_isometric_prenormal(gb)?;
    let ta = case_a_tuple(&pa).ok_or(IsometryError::UnsupportedOrbit(pa.orbit))?;
    let tb = case_a_tuple(&pb).ok_or(IsometryError::UnsupportedOrbit(pb.orbit))?;
    let tol = COEFF_TOL * tuple_scale(&ta, &tb);
    let mut best: Option<(usize, f64)> = None;
    for (k, sol) in sixteen_solutions().iter().enumerate() {
        let mapped = sol.apply(&ta);
        let res = mapped
            .iter()
            .zip(&tb)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if best.map_or(true, |(_, b)| res < b) {
            best = Some((k, res));
        }
    }
    let (best_idx, best_res) = best.unwrap();
    if best_res <= tol {
        let sol = sixteen_solutions()[best_idx];
        return Ok(EquivalenceVerdict {
            equivalent: true,
            witness: Some(EquivalenceWitness {
                solution_index: best_idx,
                source_signs: [sol.d, sol.h, sol.l],
                target_signs: sol.target_signs,
            }),
            certificate: None,
            reduced_a: ta,
            reduced_b: tb,
            max_residual: best_res,
        });
    }
    // c1, c3, c4 are fixed by every relation, so a mismatch there is an
    // unconditional obstruction.
    let mut certificate = None;
    for (idx, name) in [(7usize, "c1"), (9, "c3"), (10, "c4")] {
        if (ta[idx] - tb[idx]).abs() > tol {
            certificate = Some(name);
            break;
        }
    }
    Ok(EquivalenceVerdict {
        equivalent: false,
        witness: None,
        certificate,
        reduced_a: ta,
        reduced_b: tb,
        max_residual: best_res,
    })
}

// ---------------------------------------------------------------------------
// Locus isometries, verified by sampled containment.

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn mat3_transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

fn apply3(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|k| m[i][k] * v[k]).sum())
}

fn eval_locus(rows: &[[f64; 6]; 3], theta: f64, c: f64) -> [f64; 3] {
    let (b, a) = theta.sin_cos();
    std::array::from_fn(|i| {
        let [l, m, n, p, q, r] = rows[i];
        l * a * a + m * a * b + n * b * b + p * c * c + q * a * c + r * b * c
    })
}

fn locus_jacobian(rows: &[[f64; 6]; 3], theta: f64, c: f64) -> [[f64; 2]; 3] {
    let (b, a) = theta.sin_cos();
    std::array::from_fn(|i| {
        let [l, m, n, p, q, r] = rows[i];
        [
            -2.0 * l * a * b + m * (a * a - b * b) + 2.0 * n * a * b - q * b * c + r * a * c,
            2.0 * p * c + q * a + r * b,
        ]
    })
}

/// Gauss-Newton descent of the squared distance from `q` to the locus,
/// started at (theta0, c0).
fn descend(rows: &[[f64; 6]; 3], q: &[f64; 3], theta0: f64, c0: f64) -> f64 {
    let dist2 = |theta: f64, c: f64| -> f64 {
        let p = eval_locus(rows, theta, c);
        (0..3).map(|i| (p[i] - q[i]) * (p[i] - q[i])).sum()
    };
    let (mut theta, mut c) = (theta0, c0);
    let mut best = dist2(theta, c);
    for _ in 0..40 {
        let p = eval_locus(rows, theta, c);
        let j = locus_jacobian(rows, theta, c);
        let r: [f64; 3] = std::array::from_fn(|i| p[i] - q[i]);
        // Normal equations for the 2-parameter least squares step.
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for i in 0..3 {
            for s in 0..2 {
                for t in 0..2 {
                    jtj[s][t] += j[i][s] * j[i][t];
                }
                jtr[s] += j[i][s] * r[i];
            }
        }
        let damp = 1e-12 * (1.0 + jtj[0][0].abs() + jtj[1][1].abs());
        jtj[0][0] += damp;
        jtj[1][1] += damp;
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dtheta = (-jtr[0] * jtj[1][1] + jtr[1] * jtj[0][1]) / det;
        let dc = (-jtr[1] * jtj[0][0] + jtr[0] * jtj[1][0]) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let cand = dist2(theta + step * dtheta, c + step * dc);
            if cand < best {
                theta += step * dtheta;
                c += step * dc;
                best = cand;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || best < 1e-28 {
            break;
        }
    }
    best.sqrt()
}

const CONTAIN_TOL: f64 = 1e-6;
const WINDOW_C: f64 = 5.0;

fn grid(n_theta: usize, n_c: usize, c_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n_theta * n_c);
    for i in 0..n_theta {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n_theta as f64;
        for jdx in 0..n_c {
            let c = -c_max + 2.0 * c_max * jdx as f64 / (n_c as f64 - 1.0);
            out.push((theta, c));
        }
    }
    out
}

/// True iff `q` lies within `tol` of the locus. Descents start from the
/// best c seed of every theta column (closest columns first) because the
/// squared distance has many local basins in theta.
fn within_distance(
    rows: &[[f64; 6]; 3],
    q: &[f64; 3],
    thetas: &[f64],
    cs: &[f64],
    tol: f64,
) -> bool {
    let dist2 = |theta: f64, c: f64| -> f64 {
        let p = eval_locus(rows, theta, c);
        (0..3).map(|i| (p[i] - q[i]) * (p[i] - q[i])).sum()
    };
    let mut starts: Vec<(f64, f64, f64)> = thetas
        .iter()
        .map(|&theta| {
            let (d, c) = cs
                .iter()
                .map(|&c| (dist2(theta, c), c))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .unwrap();
            (d, theta, c)
        })
        .collect();
    starts.sort_by(|x, y| x.0.total_cmp(&y.0));
    starts
        .iter()
        .any(|&(_, theta, c)| descend(rows, q, theta, c) <= tol)
}

/// Directed sampled containment: every mapped sample of the first locus
/// lies within CONTAIN_TOL of the second locus.
fn contained(
    rows_from: &[[f64; 6]; 3],
    phi: &[[f64; 3]; 3],
    rows_to: &[[f64; 6]; 3],
    thetas: &[f64],
    cs: &[f64],
) -> bool {
    for (theta, c) in grid(20, 25, WINDOW_C) {
        let p = apply3(phi, &eval_locus(rows_from, theta, c));
        if !within_distance(rows_to, &p, thetas, cs, CONTAIN_TOL) {
            return false;
        }
    }
    true
}

/// The normal-space isometries carrying the curvature locus of the first
/// prepared germ onto the second's. Candidates are built from the
/// recorded reduction frames composed with the diagonal sign isometries
/// fixing the last normal direction; each candidate is kept only if
/// symmetric sampled containment holds at 1e-6 over the window |c| <= 5.
pub fn locus_isometries(
    ga: &MapGerm,
    gb: &MapGerm,
) -> Result<Vec<[[f64; 3]; 3]>, IsometryError> {
    let pa = reduce_isometric_prenormal(ga)?;
    let pb = reduce_isometric_prenormal(gb)?;
    if pa.orbit != Orbit::XzYzZ2 {
        return Err(IsometryError::UnsupportedOrbit(pa.orbit));
    }
    if pb.orbit != Orbit::XzYzZ2 {
        return Err(IsometryError::UnsupportedOrbit(pb.orbit));
    }
    let prep_a = crate::germ::prepare(ga)?;
    let prep_b = crate::germ::prepare(gb)?;
    let rows_a = crate::germ::second_form_matrix(&prep_a).rows_f64();
    let rows_b = crate::germ::second_form_matrix(&prep_b).rows_f64();
    let qa = pa.normal_rotation;
    let qbt = mat3_transpose(&pb.normal_rotation);
    let thetas: Vec<f64> = (0..60)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / 60.0)
        .collect();
    let cs: Vec<f64> = (0..41)
        .map(|j| -(WINDOW_C + 1.0) + 2.0 * (WINDOW_C + 1.0) * j as f64 / 40.0)
        .collect();
    let mut out = Vec::new();
    for s1 in [1.0f64, -1.0] {
        for s2 in [1.0f64, -1.0] {
            let d = [[s1, 0.0, 0.0], [0.0, s2, 0.0], [0.0, 0.0, 1.0]];
            let phi = mat3_mul(&qbt, &mat3_mul(&d, &qa));
            let phi_t = mat3_transpose(&phi);
            if contained(&rows_a, &phi, &rows_b, &thetas, &cs)
                && contained(&rows_b, &phi_t, &rows_a, &thetas, &cs)
            {
                let duplicate = out.iter().any(|m: &[[f64; 3]; 3]| {
                    (0..3).all(|i| (0..3).all(|j| (m[i][j] - phi[i][j]).abs() < 1e-9))
                });
                if !duplicate {
                    out.push(phi);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::parse_germ;

    fn germ(text: &str) -> MapGerm {
        parse_germ(text).unwrap()
    }

    #[test]
    fn solutions_basic_structure() {
        let sols = sixteen_solutions();
        assert_eq!(sols.len(), 16);
        assert_eq!(sols[0].relation, [1; 13]);
        assert_eq!(sols[0].target_signs, [1, 1, 1, 1, 1]);
        for s in &sols {
            // a33 and a55 are forced.
            assert_eq!(s.target_signs[2], s.d * s.l);
            assert_eq!(s.target_signs[4], 1);
            // Every relation is an involution.
            for m in s.relation {
                assert_eq!(m * m, 1);
            }
            // c1, c3, c4 are invariant.
            assert_eq!(s.relation[7], 1);
            assert_eq!(s.relation[9], 1);
            assert_eq!(s.relation[10], 1);
        }
    }

    #[test]
    fn solution_d_negated() {
        // d = -1, h = l = 1 negates a1, a3, a6, b2, c2, c5 and fixes the rest.
        let sols = sixteen_solutions();
        let s = sols
            .iter()
            .find(|s| (s.d, s.h, s.l, s.target_signs[3]) == (-1, 1, 1, 1))
            .unwrap();
        assert_eq!(s.relation, [-1, -1, -1, 1, -1, 1, 1, 1, -1, 1, 1, -1, 1]);
        assert_eq!(s.target_signs, [-1, 1, -1, 1, 1]);
    }

    #[test]
    fn solution_b_row_negated() {
        // d = h = l = 1, a44 = -1 negates exactly the b row.
        let sols = sixteen_solutions();
        let s = sols
            .iter()
            .find(|s| (s.d, s.h, s.l, s.target_signs[3]) == (1, 1, 1, -1))
            .unwrap();
        assert_eq!(s.relation, [1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn solutions_closed_under_composition() {
        let sols = sixteen_solutions();
        for s in &sols {
            for t in &sols {
                let composed: [i32; 13] =
                    std::array::from_fn(|i| s.relation[i] * t.relation[i]);
                assert!(
                    sols.iter().any(|u| u.relation == composed),
                    "composition escapes the set"
                );
            }
        }
    }

    #[test]
    fn reflexive_equivalence() {
        let g = germ("(x, y, x*z, y*z, z^2)");
        let v = check_jet_isometry_equivalence(&g, &g).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.witness.as_ref().unwrap().solution_index, 0);
        assert!(v.max_residual <= 1e-12);
    }

    #[test]
    fn scaled_z2_coefficient_is_inequivalent() {
        let a = germ("(x, y, x*z, y*z, z^2)");
        let b = germ("(x, y, x*z, y*z, 2*z^2)");
        let v = check_jet_isometry_equivalence(&a, &b).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.certificate, Some("c4"));
    }

    #[test]
    fn unsupported_orbit_errors() {
        let a = germ("(x, y, x*z, y*z, z^2)");
        let b = germ("(x, y, z^2, x*z, 0)");
        assert!(matches!(
            check_jet_isometry_equivalence(&a, &b),
            Err(IsometryError::UnsupportedOrbit(Orbit::Z2Xz))
        ));
        assert!(matches!(
            locus_isometries(&b, &b),
            Err(IsometryError::UnsupportedOrbit(Orbit::Z2Xz))
        ));
    }

    fn case_a_germ_text(t: &[f64; 13]) -> String {
        // Rational-looking coefficients only: callers pass multiples of 1/8.
        let frac = |v: f64| -> String {
            let num = (v * 8.0).round() as i64;
            format!("{num}/8")
        };
        format!(
            "(x, y, {}*x^2 + {}*y^2 + x*z + {}*y*z, {}*x^2 + {}*x*y + {}*y^2 + {}*y*z, {}*x^2 + {}*x*y + {}*y^2 + {}*z^2 + {}*x*z + {}*y*z)",
            frac(t[0]), frac(t[1]), frac(t[2]),
            frac(t[3]), frac(t[4]), frac(t[5]), frac(t[6]),
            frac(t[7]), frac(t[8]), frac(t[9]), frac(t[10]), frac(t[11]), frac(t[12]),
        )
    }

    fn sample_tuple() -> [f64; 13] {
        [
            0.25, -0.5, 0.375, 0.125, -0.25, 0.5, 0.75, -0.375, 0.25, 0.125, 1.25, -0.125, 0.625,
        ]
    }

    #[test]
    fn each_relation_detected_with_correct_witness() {
        let t = sample_tuple();
        let ga = germ(&case_a_germ_text(&t));
        for (k, sol) in sixteen_solutions().iter().enumerate() {
            let gb = germ(&case_a_germ_text(&sol.apply(&t)));
            let v = check_jet_isometry_equivalence(&ga, &gb).unwrap();
            assert!(v.equivalent, "relation {k} not detected");
            let w = v.witness.unwrap();
            let witness_sol = sixteen_solutions()[w.solution_index];
            // The witness relation must map tuple A to tuple B.
            let mapped = witness_sol.apply(&v.reduced_a);
            for i in 0..13 {
                assert!((mapped[i] - v.reduced_b[i]).abs() <= 1e-9);
            }
            assert_eq!(witness_sol.relation, sol.relation);
        }
    }

    #[test]
    fn locus_isometries_reflexive_and_b_negation() {
        let g = germ("(x, y, x*z, y*z, z^2)");
        let isos = locus_isometries(&g, &g).unwrap();
        assert!(isos.iter().any(|m| {
            (0..3).all(|i| (0..3).all(|j| (m[i][j] - [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]][i][j]).abs() < 1e-9))
        }));
        let gb = germ("(x, y, x*z, -y*z, z^2)");
        let isos = locus_isometries(&g, &gb).unwrap();
        assert!(!isos.is_empty());
        let flip = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(isos.iter().any(|m| {
            (0..3).all(|i| (0..3).all(|j| (m[i][j] - flip[i][j]).abs() < 1e-6))
        }));
    }

    #[test]
    fn inequivalent_pair_has_no_locus_isometry() {
        let a = germ("(x, y, x*z, y*z, z^2)");
        let b = germ("(x, y, x*z, y*z, 2*z^2)");
        assert!(locus_isometries(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn verdict_and_locus_isometries_agree() {
        let t = sample_tuple();
        let ga = germ(&case_a_germ_text(&t));
        let sol = sixteen_solutions()[5];
        let gb = germ(&case_a_germ_text(&sol.apply(&t)));
        let v = check_jet_isometry_equivalence(&ga, &gb).unwrap();
        let isos = locus_isometries(&ga, &gb).unwrap();
        assert_eq!(v.equivalent, !isos.is_empty());
        let gc = germ("(x, y, x*z, y*z, 3*z^2)");
        let v = check_jet_isometry_equivalence(&ga, &gc).unwrap();
        let isos = locus_isometries(&ga, &gc).unwrap();
        assert_eq!(v.equivalent, !isos.is_empty());
    }
}
