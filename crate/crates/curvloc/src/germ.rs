//! Map germs (R^3, 0) -> (R^5, 0): parsing, corank, preparation to
//! Monge-like coordinates, and the fundamental forms at the singular point.

use num::Zero;
use thiserror::Error;

use crate::linalg::{dot, orthogonal_to_first_axes, RatMat};
use crate::poly::{rat, rational_sqrt, ParseError, Poly3, Rat};

#[derive(Debug, Error)]
pub enum GermError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("expected 5 components, found {0}")]
    WrongArity(usize),
    #[error("component {0} has a nonzero constant term")]
    NonzeroConstant(usize),
    #[error("germ does not have corank 1 at the origin")]
    NotCorankOne,
    #[error("tangent plane admits no rational orthonormal frame; cannot prepare exactly")]
    NoRationalFrame,
}

/// A polynomial map germ (R^3, 0) -> (R^5, 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapGerm {
    pub comps: [Poly3; 5],
}

impl MapGerm {
    pub fn new(comps: [Poly3; 5]) -> Result<Self, GermError> {
        for (i, c) in comps.iter().enumerate() {
            if !c.constant_term().is_zero() {
                return Err(GermError::NonzeroConstant(i + 1));
            }
        }
        Ok(MapGerm { comps })
    }

    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }

    /// 5x3 Jacobian at the origin (columns d/dx, d/dy, d/dz).
    pub fn jacobian_at_origin(&self) -> RatMat {
        let mut j = RatMat::zeros(5, 3);
        for (i, c) in self.comps.iter().enumerate() {
            let lin = c.linear_coeffs();
            for (k, v) in lin.into_iter().enumerate() {
                j[(i, k)] = v;
            }
        }
        j
    }
}

/// Parse a germ "(p1, p2, p3, p4, p5)" in variables x, y, z.
pub fn parse_germ(text: &str) -> Result<MapGerm, GermError> {
    let comps = crate::poly::parse_poly_tuple(text)?;
    if comps.len() != 5 {
        return Err(GermError::WrongArity(comps.len()));
    }
    let arr: [Poly3; 5] = comps.try_into().unwrap();
    MapGerm::new(arr)
}

/// Corank of the germ at the origin: 3 minus the rank of the differential.
pub fn corank_at_origin(g: &MapGerm) -> usize {
    3 - g.jacobian_at_origin().rank()
}

/// Germ in Monge-like coordinates: components (x, y, f1, f2, f3) with the
/// fi free of linear terms, together with the exact changes used.
///
/// `source` maps new source coordinates to the original ones; `target` is an
/// orthogonal 5x5 matrix applied to the original target coordinates.
/// The original germ is target^T . (comps o source^{-1}).
#[derive(Debug, Clone)]
pub struct PreparedGerm {
    pub comps: [Poly3; 5],
    pub source: RatMat,
    pub target: RatMat,
}

impl PreparedGerm {
    /// The three normal components f1, f2, f3.
    pub fn normal_comps(&self) -> [&Poly3; 3] {
        [&self.comps[2], &self.comps[3], &self.comps[4]]
    }

    /// Reconstruct the original germ from the recorded changes.
    pub fn reconstruct_original(&self) -> MapGerm {
        let sinv = self.source.inverse().expect("source change invertible");
        let mut m: [[Rat; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Rat::zero()));
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = sinv[(i, j)].clone();
            }
        }
        let unsourced: Vec<Poly3> = self
            .comps
            .iter()
            .map(|c| c.substitute_linear(&m))
            .collect();
        let tinv = self.target.transpose();
        let mut comps: [Poly3; 5] = std::array::from_fn(|_| Poly3::zero());
        for (i, comp) in comps.iter_mut().enumerate() {
            let mut acc = Poly3::zero();
            for (j, u) in unsourced.iter().enumerate() {
                acc = acc.add(&u.scale(&tinv[(i, j)]));
            }
            *comp = acc;
        }
        MapGerm { comps }
    }
}

/// Search the span of b1, b2 for an exact orthonormal pair.
///
/// Gram-Schmidt only stays rational when the norms it meets are squares of
/// rationals, so a few small integer combinations are tried as the leading
/// vector before giving up.
fn rational_orthonormal_pair(b1: &[Rat], b2: &[Rat]) -> Option<(Vec<Rat>, Vec<Rat>)> {
    let combos: [(i64, i64); 9] = [
        (1, 0),
        (0, 1),
        (1, 1),
        (1, -1),
        (1, 2),
        (2, 1),
        (1, -2),
        (2, -1),
        (3, 1),
    ];
    for &(s, t) in &combos {
        let v1: Vec<Rat> = b1
            .iter()
            .zip(b2)
            .map(|(a, b)| a * rat(s) + b * rat(t))
            .collect();
        let n1 = dot(&v1, &v1);
        if n1.is_zero() {
            continue;
        }
        let Some(r1) = rational_sqrt(&n1) else {
            continue;
        };
        let w1: Vec<Rat> = v1.iter().map(|x| x / &r1).collect();
        // Orthogonalize whichever of b1, b2 is independent of w1.
        for cand in [b1, b2] {
            let proj = dot(cand, &w1);
            let resid: Vec<Rat> = cand
                .iter()
                .zip(&w1)
                .map(|(a, w)| a - &proj * w)
                .collect();
            let n2 = dot(&resid, &resid);
            if n2.is_zero() {
                continue;
            }
            if let Some(r2) = rational_sqrt(&n2) {
                let w2: Vec<Rat> = resid.iter().map(|x| x / &r2).collect();
                return Some((w1, w2));
            }
        }
    }
    None
}

/// Reduce a corank-1 germ to the form (x, y, f1, f2, f3) with the fi free
/// of linear terms. The source change is linear with the kernel of the
/// differential sent to d/dz; the target change is an exact orthogonal
/// matrix.
pub fn prepare(g: &MapGerm) -> Result<PreparedGerm, GermError> {
    let jac = g.jacobian_at_origin();
    if jac.rank() != 2 {
        return Err(GermError::NotCorankOne);
    }

    // Basis of the column space, first independent column first.
    let jt = jac.transpose();
    let (rr, pivots) = jt.transpose().rref();
    let _ = rr;
    let b1 = jac.col(pivots[0]);
    let b2 = jac.col(pivots[1]);
    let (w1, w2) = rational_orthonormal_pair(&b1, &b2).ok_or(GermError::NoRationalFrame)?;
    let target = orthogonal_to_first_axes(&w1, &w2).expect("orthonormal pair");

    // Rotate the target space.
    let mut rotated: [Poly3; 5] = std::array::from_fn(|_| Poly3::zero());
    for (i, slot) in rotated.iter_mut().enumerate() {
        let mut acc = Poly3::zero();
        for (j, c) in g.comps.iter().enumerate() {
            acc = acc.add(&c.scale(&target[(i, j)]));
        }
        *slot = acc;
    }

    // Source change: columns solving K s = e1, K s = e2, plus the kernel.
    let tj = target.matmul(&jac);
    let mut k = RatMat::zeros(2, 3);
    for i in 0..2 {
        for j in 0..3 {
            k[(i, j)] = tj[(i, j)].clone();
        }
    }
    let s1 = k.solve(&[rat(1), rat(0)]).expect("rank 2 system");
    let s2 = k.solve(&[rat(0), rat(1)]).expect("rank 2 system");
    let kernel = jac.nullspace();
    let s3 = kernel.first().expect("corank 1 kernel").clone();
    let mut source = RatMat::zeros(3, 3);
    for i in 0..3 {
        source[(i, 0)] = s1[i].clone();
        source[(i, 1)] = s2[i].clone();
        source[(i, 2)] = s3[i].clone();
    }
    debug_assert!(!source.det().is_zero());

    let mut m: [[Rat; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Rat::zero()));
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = source[(i, j)].clone();
        }
    }
    let comps: [Poly3; 5] = std::array::from_fn(|i| rotated[i].substitute_linear(&m));

    debug_assert_eq!(comps[0], Poly3::var(0));
    debug_assert_eq!(comps[1], Poly3::var(1));
    debug_assert!(comps[2..]
        .iter()
        .all(|c| c.linear_coeffs().iter().all(|v| v.is_zero())));

    Ok(PreparedGerm {
        comps,
        source,
        target,
    })
}

/// First fundamental form coefficients at the origin.
///
/// The last three are named Hq, Iq, Jq to keep them apart from the mean
/// curvature vector H used elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstFormCoefficients {
    pub e: Rat,
    pub f: Rat,
    pub g: Rat,
    pub hq: Rat,
    pub iq: Rat,
    pub jq: Rat,
}

pub fn first_form_coefficients(p: &PreparedGerm) -> FirstFormCoefficients {
    let fx: Vec<Rat> = p.comps.iter().map(|c| c.partial(0).constant_term()).collect();
    let fy: Vec<Rat> = p.comps.iter().map(|c| c.partial(1).constant_term()).collect();
    let fz: Vec<Rat> = p.comps.iter().map(|c| c.partial(2).constant_term()).collect();
    FirstFormCoefficients {
        e: dot(&fx, &fx),
        f: dot(&fx, &fy),
        g: dot(&fy, &fy),
        hq: dot(&fz, &fz),
        iq: dot(&fx, &fz),
        jq: dot(&fy, &fz),
    }
}

/// 3x6 coefficient matrix of the second fundamental form in the frame
/// {e3, e4, e5}. Columns are ordered (l, m, n, p, q, r), i.e. the second
/// partials with respect to (xx, xy, yy, zz, xz, yz).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondFormMatrix {
    pub rows: [[Rat; 6]; 3],
}

impl SecondFormMatrix {
    pub fn from_normal_comps(comps: &[&Poly3; 3]) -> Self {
        let rows = std::array::from_fn(|i| second_partials_at_origin(comps[i]));
        SecondFormMatrix { rows }
    }

    pub fn to_ratmat(&self) -> RatMat {
        RatMat::from_rows(self.rows.iter().map(|r| r.to_vec()).collect())
    }

    pub fn rank(&self) -> usize {
        self.to_ratmat().rank()
    }

    pub fn rows_f64(&self) -> [[f64; 6]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| crate::poly::rat_to_f64(&self.rows[i][j])))
    }
}

/// Second partials of `p` at the origin in the order
/// (xx, xy, yy, zz, xz, yz).
fn second_partials_at_origin(p: &Poly3) -> [Rat; 6] {
    [
        p.coeff([2, 0, 0]) * rat(2),
        p.coeff([1, 1, 0]),
        p.coeff([0, 2, 0]) * rat(2),
        p.coeff([0, 0, 2]) * rat(2),
        p.coeff([1, 0, 1]),
        p.coeff([0, 1, 1]),
    ]
}

pub fn second_form_matrix(p: &PreparedGerm) -> SecondFormMatrix {
    SecondFormMatrix::from_normal_comps(&p.normal_comps())
}

/// II(u, u) for u = a d/dx + b d/dy + c d/dz, in normal coordinates.
pub fn eval_second_form(m: &SecondFormMatrix, u: &[Rat; 3]) -> [Rat; 3] {
    let [a, b, c] = u;
    let mono = [
        a * a,
        rat(2) * a * b,
        b * b,
        c * c,
        rat(2) * a * c,
        rat(2) * b * c,
    ];
    std::array::from_fn(|i| {
        let mut acc = Rat::zero();
        for j in 0..6 {
            acc += &m.rows[i][j] * &mono[j];
        }
        acc
    })
}

pub fn eval_second_form_f64(rows: &[[f64; 6]; 3], u: &[f64; 3]) -> [f64; 3] {
    let [a, b, c] = *u;
    let mono = [a * a, 2.0 * a * b, b * b, c * c, 2.0 * a * c, 2.0 * b * c];
    std::array::from_fn(|i| (0..6).map(|j| rows[i][j] * mono[j]).sum())
}

/// The 18 quadratic coefficients of a prepared 2-jet, in rows for the three
/// normal components and columns (x^2, xy, y^2, z^2, xz, yz).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetCoefficients {
    pub rows: [[Rat; 6]; 3],
}

impl JetCoefficients {
    pub fn from_prepared(p: &PreparedGerm) -> Self {
        Self::from_normal_comps(&p.normal_comps())
    }

    pub fn from_normal_comps(comps: &[&Poly3; 3]) -> Self {
        let rows = std::array::from_fn(|i| {
            let c = comps[i];
            [
                c.coeff([2, 0, 0]),
                c.coeff([1, 1, 0]),
                c.coeff([0, 2, 0]),
                c.coeff([0, 0, 2]),
                c.coeff([1, 0, 1]),
                c.coeff([0, 1, 1]),
            ]
        });
        JetCoefficients { rows }
    }

    /// The 3x3 matrix of (z^2, xz, yz) coefficients.
    pub fn alpha(&self) -> RatMat {
        RatMat::from_rows(
            self.rows
                .iter()
                .map(|r| vec![r[3].clone(), r[4].clone(), r[5].clone()])
                .collect(),
        )
    }

    pub fn d(&self) -> Rat {
        self.alpha().det()
    }

    pub fn alpha_rank(&self) -> usize {
        self.alpha().rank()
    }

    /// True iff some z^2 coefficient is nonzero.
    pub fn z2_column_nonzero(&self) -> bool {
        self.rows.iter().any(|r| !r[3].is_zero())
    }

    /// True iff all of the x^2, xy, y^2 coefficients vanish.
    pub fn is_special_class(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r[0].is_zero() && r[1].is_zero() && r[2].is_zero())
    }

    /// Normal components of the 2-jet as polynomials.
    pub fn to_normal_polys(&self) -> [Poly3; 3] {
        let expos: [crate::poly::Expo; 6] = [
            [2, 0, 0],
            [1, 1, 0],
            [0, 2, 0],
            [0, 0, 2],
            [1, 0, 1],
            [0, 1, 1],
        ];
        std::array::from_fn(|i| {
            let mut p = Poly3::zero();
            for (j, e) in expos.iter().enumerate() {
                p.add_term(*e, self.rows[i][j].clone());
            }
            p
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratq;

    pub fn crosscap() -> MapGerm {
        parse_germ("(x, y, x*z, y*z, z^2)").unwrap()
    }

    #[test]
    fn parse_crosscap_and_roundtrip() {
        let g = crosscap();
        assert_eq!(g.to_text(), "(x, y, x*z, y*z, z^2)");
        let h = parse_germ(&g.to_text()).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn parse_zero_normal_germ() {
        let g = parse_germ("(x, y, 0, 0, 0)").unwrap();
        assert!(g.comps[2].is_zero());
    }

    #[test]
    fn parse_arity_error() {
        match parse_germ("(x, y, z)") {
            Err(GermError::WrongArity(3)) => {}
            other => panic!("expected arity error, got {:?}", other),
        }
    }

    #[test]
    fn parse_constant_term_error() {
        assert!(matches!(
            parse_germ("(x, y, z^2 + 1, 0, 0)"),
            Err(GermError::NonzeroConstant(3))
        ));
    }

    #[test]
    fn corank_values() {
        assert_eq!(corank_at_origin(&crosscap()), 1);
        assert_eq!(corank_at_origin(&parse_germ("(x, y, z, 0, 0)").unwrap()), 0);
        assert_eq!(
            corank_at_origin(&parse_germ("(x+z, y, x*z, y*z, z^2)").unwrap()),
            1
        );
    }

    #[test]
    fn prepare_crosscap_is_identity() {
        let p = prepare(&crosscap()).unwrap();
        assert_eq!(p.comps, crosscap().comps);
        assert_eq!(p.source, RatMat::identity(3));
        assert_eq!(p.target, RatMat::identity(5));
    }

    #[test]
    fn prepare_swapped_crosscap() {
        let g = parse_germ("(y, x, x*z, y*z, z^2)").unwrap();
        let p = prepare(&g).unwrap();
        assert_eq!(p.comps[0], Poly3::var(0));
        assert_eq!(p.comps[1], Poly3::var(1));
        for c in &p.comps[2..] {
            assert!(c.linear_coeffs().iter().all(|v| num::Zero::is_zero(v)));
        }
        assert_eq!(p.reconstruct_original(), g);
    }

    #[test]
    fn prepare_rejects_full_rank() {
        let g = parse_germ("(x, y, z, x*z, z^2)").unwrap();
        assert!(matches!(prepare(&g), Err(GermError::NotCorankOne)));
    }

    #[test]
    fn prepare_sheared_source() {
        let g = parse_germ("(x+z, y, x*z, y*z, z^2)").unwrap();
        let p = prepare(&g).unwrap();
        assert_eq!(p.reconstruct_original(), g);
        let ff = first_form_coefficients(&p);
        assert_eq!(ff.e, rat(1));
        assert_eq!(ff.g, rat(1));
        assert!(ff.f.is_zero() && ff.hq.is_zero() && ff.iq.is_zero() && ff.jq.is_zero());
    }

    #[test]
    fn first_form_of_crosscap() {
        let p = prepare(&crosscap()).unwrap();
        let ff = first_form_coefficients(&p);
        assert_eq!(
            ff,
            FirstFormCoefficients {
                e: rat(1),
                f: rat(0),
                g: rat(1),
                hq: rat(0),
                iq: rat(0),
                jq: rat(0)
            }
        );
    }

    #[test]
    fn second_form_of_crosscap() {
        let p = prepare(&crosscap()).unwrap();
        let m = second_form_matrix(&p);
        let want = [
            [rat(0), rat(0), rat(0), rat(0), rat(1), rat(0)],
            [rat(0), rat(0), rat(0), rat(0), rat(0), rat(1)],
            [rat(0), rat(0), rat(0), rat(2), rat(0), rat(0)],
        ];
        assert_eq!(m.rows, want);
        // II(u,u) = (2ac, 2bc, 2c^2).
        assert_eq!(
            eval_second_form(&m, &[rat(1), rat(0), rat(1)]),
            [rat(2), rat(0), rat(2)]
        );
        assert_eq!(
            eval_second_form(&m, &[rat(1), rat(0), rat(0)]),
            [rat(0), rat(0), rat(0)]
        );
        assert_eq!(
            eval_second_form(&m, &[rat(0), rat(1), rat(2)]),
            [rat(0), rat(4), rat(8)]
        );
    }

    #[test]
    fn second_form_zero_normal() {
        let p = prepare(&parse_germ("(x, y, 0, 0, 0)").unwrap()).unwrap();
        let m = second_form_matrix(&p);
        assert!(m.to_ratmat().is_zero());
    }

    #[test]
    fn second_form_with_y2_term() {
        // (x, y, xz + y^2, yz, z^2): crosscap matrix plus n = 2 in row 1.
        let p = prepare(&parse_germ("(x, y, x*z + y^2, y*z, z^2)").unwrap()).unwrap();
        let m = second_form_matrix(&p);
        assert_eq!(m.rows[0], [rat(0), rat(0), rat(2), rat(0), rat(1), rat(0)]);
    }

    #[test]
    fn jet_coefficients_of_crosscap() {
        let p = prepare(&crosscap()).unwrap();
        let j = JetCoefficients::from_prepared(&p);
        assert_eq!(j.alpha(), RatMat::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]));
        assert_eq!(j.d(), rat(1));
    }

    #[test]
    fn jet_coefficients_zero_and_rank_two() {
        let z = prepare(&parse_germ("(x, y, 0, 0, 0)").unwrap()).unwrap();
        let jz = JetCoefficients::from_prepared(&z);
        assert!(jz.alpha().is_zero());
        assert!(jz.d().is_zero());

        let e = prepare(&parse_germ("(x, y, x^2 + z^2, x*y + x*z, y^2)").unwrap()).unwrap();
        let je = JetCoefficients::from_prepared(&e);
        assert_eq!(
            je.alpha(),
            RatMat::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]])
        );
        assert!(je.d().is_zero());
        assert_eq!(je.alpha_rank(), 2);
    }

    #[test]
    fn eval_second_form_homogeneous_degree_two() {
        let p = prepare(&crosscap()).unwrap();
        let m = second_form_matrix(&p);
        let u = [ratq(1, 2), rat(3), ratq(-5, 7)];
        let t = ratq(4, 3);
        let scaled: [Rat; 3] = std::array::from_fn(|i| &u[i] * &t);
        let lhs = eval_second_form(&m, &scaled);
        let rhs = eval_second_form(&m, &u).map(|v| v * &t * &t);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn alpha_rank_matches_last_columns_of_second_form() {
        for text in [
            "(x, y, x*z, y*z, z^2)",
            "(x, y, x^2 + z^2, x*y + x*z, y^2)",
            "(x, y, z^2, 0, 0)",
            "(x, y, 0, 0, 0)",
        ] {
            let p = prepare(&parse_germ(text).unwrap()).unwrap();
            let j = JetCoefficients::from_prepared(&p);
            let m = second_form_matrix(&p);
            let last3 = RatMat::from_rows(
                m.rows
                    .iter()
                    .map(|r| vec![r[3].clone(), r[4].clone(), r[5].clone()])
                    .collect(),
            );
            assert_eq!(j.alpha_rank(), last3.rank());
        }
    }
}
