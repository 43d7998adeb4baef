//! Curvature loci: cylinder-domain sampling for singular 3-manifolds in
//! R^5, the lift to regular 3-manifolds in R^6 with sphere-domain loci,
//! the blow-up correspondence between the two, affine hulls, point types,
//! the Veronese map, and exact vanishing-ideal fitting.

use num::{One, Zero};
use thiserror::Error;

use crate::germ::{eval_second_form, eval_second_form_f64, PreparedGerm, SecondFormMatrix};
use crate::linalg::RatMat;
use crate::poly::{rat, rat_to_f64, Expo, Poly3, Rat};

#[derive(Debug, Error)]
pub enum LocusError {
    #[error("grid has no points")]
    EmptyGrid,
    #[error("sample has fewer points ({points}) than monomials ({monomials}); the fitted ideal would be meaningless")]
    DegenerateSample { points: usize, monomials: usize },
    #[error("grid spec invalid: {0}")]
    BadGrid(&'static str),
}

/// Sampling grid: `n_theta` angles around the cylinder/sphere and
/// `n_second` values of the second parameter (c in [-c_max, c_max] on the
/// cylinder; phi strictly inside (0, pi) on the sphere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_second: usize,
    pub c_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_theta: 180,
            n_second: 90,
            c_max: 10.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), LocusError> {
        if self.n_theta < 4 {
            return Err(LocusError::BadGrid("need at least 4 theta samples"));
        }
        if self.n_second < 2 {
            return Err(LocusError::BadGrid("need at least 2 second-parameter samples"));
        }
        if !(self.c_max > 0.0) {
            return Err(LocusError::BadGrid("c_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Cylinder,
    Sphere,
}

/// Grid sample of a curvature locus: one normal-space point per grid node,
/// in grid order (second parameter varying fastest).
#[derive(Debug, Clone)]
pub struct LocusSample {
    pub domain: Domain,
    pub spec: GridSpec,
    /// (theta, second parameter, normal point).
    pub points: Vec<(f64, f64, [f64; 3])>,
    pub germ_text: String,
}

/// Sample the singular curvature locus over the unit cylinder
/// {a^2 + b^2 = 1} with (a, b, c) = (cos t, sin t, c).
pub fn sample_singular_locus(
    g: &PreparedGerm,
    spec: &GridSpec,
) -> Result<LocusSample, LocusError> {
    spec.validate()?;
    let rows = crate::germ::second_form_matrix(g).rows_f64();
    let mut points = Vec::with_capacity(spec.n_theta * spec.n_second);
    for i in 0..spec.n_theta {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / spec.n_theta as f64;
        let (s, c0) = theta.sin_cos();
        for j in 0..spec.n_second {
            let c = -spec.c_max
                + 2.0 * spec.c_max * j as f64 / (spec.n_second as f64 - 1.0);
            let p = eval_second_form_f64(&rows, &[c0, s, c]);
            points.push((theta, c, p));
        }
    }
    Ok(LocusSample {
        domain: Domain::Cylinder,
        spec: *spec,
        points,
        germ_text: germ_text_of(g),
    })
}

fn germ_text_of(g: &PreparedGerm) -> String {
    let parts: Vec<String> = g.comps.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Exact locus points on the cylinder via the tangent half-angle chart
/// (a, b) = ((1 - t^2)/(1 + t^2), 2t/(1 + t^2)).
pub fn exact_cylinder_samples(m: &SecondFormMatrix, ts: &[Rat], cs: &[Rat]) -> Vec<[Rat; 3]> {
    let mut out = Vec::with_capacity(ts.len() * cs.len());
    for t in ts {
        let den = Rat::one() + t * t;
        let a = (Rat::one() - t * t) / &den;
        let b = rat(2) * t / &den;
        for c in cs {
            out.push(eval_second_form(m, &[a.clone(), b.clone(), c.clone()]));
        }
    }
    out
}

/// Exact unit sphere points via the chart
/// (u, v, w) = (2s, 2t, 1 - s^2 - t^2) / (1 + s^2 + t^2).
pub fn rational_sphere_point(s: &Rat, t: &Rat) -> [Rat; 3] {
    let den = Rat::one() + s * s + t * t;
    [
        rat(2) * s / &den,
        rat(2) * t / &den,
        (Rat::one() - s * s - t * t) / &den,
    ]
}

/// A regular 3-manifold germ in R^6 in Monge form (x, y, z, f1, f2, f3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGerm {
    pub comps: [Poly3; 6],
}

impl RegularGerm {
    pub fn normal_comps(&self) -> [&Poly3; 3] {
        [&self.comps[3], &self.comps[4], &self.comps[5]]
    }

    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }

    pub fn second_form_matrix(&self) -> SecondFormMatrix {
        SecondFormMatrix::from_normal_comps(&self.normal_comps())
    }
}

/// Lift (x, y, f1, f2, f3) to the regular germ (x, y, z, f1, f2, f3);
/// projecting the image back along the z target axis recovers the
/// singular germ.
pub fn lift_to_regular(g: &PreparedGerm) -> RegularGerm {
    RegularGerm {
        comps: [
            g.comps[0].clone(),
            g.comps[1].clone(),
            Poly3::var(2),
            g.comps[2].clone(),
            g.comps[3].clone(),
            g.comps[4].clone(),
        ],
    }
}

/// The six normal vectors parametrising the sphere-domain curvature locus:
/// eta(theta, phi) = H + (1 + 3cos 2phi) B1 + cos 2theta sin^2 phi B2
///   + sin 2theta sin^2 phi B3 + cos theta sin 2phi B4 + sin theta sin 2phi B5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularLocusCoefficients {
    pub hvec: [Rat; 3],
    pub b1: [Rat; 3],
    pub b2: [Rat; 3],
    pub b3: [Rat; 3],
    pub b4: [Rat; 3],
    pub b5: [Rat; 3],
}

pub fn regular_locus_coefficients(g: &RegularGerm) -> RegularLocusCoefficients {
    let m = g.second_form_matrix();
    // Columns of the second-form matrix: (xx, xy, yy, zz, xz, yz).
    let col = |k: usize| -> [Rat; 3] { std::array::from_fn(|i| m.rows[i][k].clone()) };
    let fxx = col(0);
    let fxy = col(1);
    let fyy = col(2);
    let fzz = col(3);
    let fxz = col(4);
    let fyz = col(5);
    let comb = |cx: Rat, cy: Rat, cz: Rat| -> [Rat; 3] {
        std::array::from_fn(|i| &cx * &fxx[i] + &cy * &fyy[i] + &cz * &fzz[i])
    };
    RegularLocusCoefficients {
        hvec: comb(crate::poly::ratq(1, 3), crate::poly::ratq(1, 3), crate::poly::ratq(1, 3)),
        b1: comb(
            crate::poly::ratq(-1, 12),
            crate::poly::ratq(-1, 12),
            crate::poly::ratq(1, 6),
        ),
        b2: comb(crate::poly::ratq(1, 2), crate::poly::ratq(-1, 2), Rat::zero()),
        b3: fxy,
        b4: fxz,
        b5: fyz,
    }
}

impl RegularLocusCoefficients {
    pub fn to_f64(&self) -> [[f64; 3]; 6] {
        [&self.hvec, &self.b1, &self.b2, &self.b3, &self.b4, &self.b5]
            .map(|v| std::array::from_fn(|i| rat_to_f64(&v[i])))
    }
}

/// Sphere-domain locus point at spherical angles (theta, phi).
pub fn eval_regular_locus(c: &RegularLocusCoefficients, theta: f64, phi: f64) -> [f64; 3] {
    let [h, b1, b2, b3, b4, b5] = c.to_f64();
    let s2p = (phi.sin()) * (phi.sin());
    let weights = [
        1.0,
        1.0 + 3.0 * (2.0 * phi).cos(),
        (2.0 * theta).cos() * s2p,
        (2.0 * theta).sin() * s2p,
        theta.cos() * (2.0 * phi).sin(),
        theta.sin() * (2.0 * phi).sin(),
    ];
    std::array::from_fn(|i| {
        weights[0] * h[i]
            + weights[1] * b1[i]
            + weights[2] * b2[i]
            + weights[3] * b3[i]
            + weights[4] * b4[i]
            + weights[5] * b5[i]
    })
}

/// Exact sphere-domain locus point at a rational unit vector (u, v, w),
/// via the chart-free form
/// H + (4 - 6u^2 - 6v^2) B1 + (u^2 - v^2) B2 + 2uv B3 + 2uw B4 + 2vw B5.
pub fn eval_regular_locus_exact(
    c: &RegularLocusCoefficients,
    u: &Rat,
    v: &Rat,
    w: &Rat,
) -> [Rat; 3] {
    assert!(
        (u * u + v * v + w * w).is_one(),
        "exact locus evaluation needs a unit vector"
    );
    let weights = [
        Rat::one(),
        rat(4) - rat(6) * u * u - rat(6) * v * v,
        u * u - v * v,
        rat(2) * u * v,
        rat(2) * u * w,
        rat(2) * v * w,
    ];
    let vs = [&c.hvec, &c.b1, &c.b2, &c.b3, &c.b4, &c.b5];
    std::array::from_fn(|i| {
        let mut acc = Rat::zero();
        for (wgt, vec) in weights.iter().zip(vs) {
            acc += wgt * &vec[i];
        }
        acc
    })
}

/// Sample the sphere-domain locus over (theta, phi) with phi strictly
/// inside (0, pi).
pub fn sample_regular_locus(
    g: &RegularGerm,
    spec: &GridSpec,
) -> Result<LocusSample, LocusError> {
    spec.validate()?;
    let coeffs = regular_locus_coefficients(g);
    let mut points = Vec::with_capacity(spec.n_theta * spec.n_second);
    for i in 0..spec.n_theta {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / spec.n_theta as f64;
        for j in 0..spec.n_second {
            let phi = std::f64::consts::PI * (j as f64 + 1.0) / (spec.n_second as f64 + 1.0);
            points.push((theta, phi, eval_regular_locus(&coeffs, theta, phi)));
        }
    }
    Ok(LocusSample {
        domain: Domain::Sphere,
        spec: *spec,
        points,
        germ_text: g.to_text(),
    })
}

/// The Veronese embedding xi(u, v, w) = (u^2, v^2, w^2, √2uv, √2uw, √2vw).
/// Each slot is an exact coefficient plus a flag marking a √2 factor, so
/// equality tests stay rational.
pub fn veronese(u: &Rat, v: &Rat, w: &Rat) -> [(Rat, bool); 6] {
    [
        (u * u, false),
        (v * v, false),
        (w * w, false),
        (u * v, true),
        (u * w, true),
        (v * w, true),
    ]
}

/// Point type M_i: the dimension of the first normal space, which equals
/// the rank of the second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointType {
    pub dim: usize,
}

impl PointType {
    pub fn label(&self) -> String {
        format!("M{}", self.dim)
    }
}

pub fn point_type(m: &SecondFormMatrix) -> PointType {
    PointType { dim: m.rank() }
}

/// Exact affine hull of the curvature locus: base point and a basis of the
/// direction space, both in normal coordinates.
#[derive(Debug, Clone)]
pub struct AffineHull {
    pub dim: usize,
    pub base: [Rat; 3],
    pub directions: Vec<[Rat; 3]>,
}

/// The locus is the image of the domain's degree-2 monomial flat under the
/// second-form coefficient matrix; affine maps commute with affine hulls,
/// so the hull is computed exactly from the flat's direction space.
pub fn affine_hull_of_locus(m: &SecondFormMatrix, domain: Domain) -> AffineHull {
    // Monomial vector (a^2, 2ab, b^2, c^2, 2ac, 2bc) matching the matrix
    // columns (xx, xy, yy, zz, xz, yz).
    let (base_mono, dirs): ([i64; 6], Vec<[i64; 6]>) = match domain {
        // a^2 + b^2 = 1: flat {m0 + m2 = 1}.
        Domain::Cylinder => (
            [1, 0, 0, 0, 0, 0],
            vec![
                [1, 0, -1, 0, 0, 0],
                [0, 1, 0, 0, 0, 0],
                [0, 0, 0, 1, 0, 0],
                [0, 0, 0, 0, 1, 0],
                [0, 0, 0, 0, 0, 1],
            ],
        ),
        // u^2 + v^2 + w^2 = 1: flat {m0 + m2 + m3 = 1}.
        Domain::Sphere => (
            [0, 0, 0, 1, 0, 0],
            vec![
                [1, 0, 0, -1, 0, 0],
                [0, 0, 1, -1, 0, 0],
                [0, 1, 0, 0, 0, 0],
                [0, 0, 0, 0, 1, 0],
                [0, 0, 0, 0, 0, 1],
            ],
        ),
    };
    let mm = m.to_ratmat();
    let base_vec: Vec<Rat> = base_mono.iter().map(|&v| rat(v)).collect();
    let base_img = mm.matvec(&base_vec);
    let base: [Rat; 3] = std::array::from_fn(|i| base_img[i].clone());
    let imgs: Vec<Vec<Rat>> = dirs
        .iter()
        .map(|d| {
            let dv: Vec<Rat> = d.iter().map(|&v| rat(v)).collect();
            mm.matvec(&dv)
        })
        .collect();
    let (rr, pivots) = RatMat::from_rows(imgs).rref();
    let dim = pivots.len();
    // The nonzero rows of the reduced image matrix are a basis.
    let directions: Vec<[Rat; 3]> = (0..dim)
        .map(|r| std::array::from_fn(|i| rr[(r, i)].clone()))
        .collect();
    AffineHull {
        dim,
        base,
        directions,
    }
}

/// Maximum deviation over the grid between the cylinder-domain locus at
/// (theta, c = cot phi) and (1 + c^2) times the lifted sphere-domain locus
/// at (theta, phi). The blow-up correspondence makes this zero up to
/// floating-point error.
pub fn blowup_residual(g: &PreparedGerm, spec: &GridSpec) -> Result<f64, LocusError> {
    spec.validate()?;
    let rows = crate::germ::second_form_matrix(g).rows_f64();
    let coeffs = regular_locus_coefficients(&lift_to_regular(g));
    let mut worst: f64 = 0.0;
    for i in 0..spec.n_theta {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / spec.n_theta as f64;
        let (s, c0) = theta.sin_cos();
        for j in 0..spec.n_second {
            let phi = std::f64::consts::PI * (j as f64 + 1.0) / (spec.n_second as f64 + 1.0);
            let c = phi.cos() / phi.sin();
            let sing = eval_second_form_f64(&rows, &[c0, s, c]);
            let lifted = eval_regular_locus(&coeffs, theta, phi);
            let scale = 1.0 + c * c;
            for k in 0..3 {
                worst = worst.max((sing[k] - scale * lifted[k]).abs());
            }
        }
    }
    Ok(worst)
}

/// All exponent triples of total degree at most d, in graded lex order.
pub fn monomials_up_to(d: u32) -> Vec<Expo> {
    let mut out = Vec::new();
    for total in 0..=d {
        for i in (0..=total).rev() {
            for j in (0..=(total - i)).rev() {
                out.push([i, j, total - i - j]);
            }
        }
    }
    out
}

/// Exact basis (reduced echelon form) of the polynomials of degree <= d in
/// the normal coordinates that vanish on every sample point.
pub fn fit_vanishing_forms(points: &[[Rat; 3]], degree: u32) -> Result<Vec<Poly3>, LocusError> {
    let monos = monomials_up_to(degree);
    if points.len() < monos.len() {
        return Err(LocusError::DegenerateSample {
            points: points.len(),
            monomials: monos.len(),
        });
    }
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| {
            monos
                .iter()
                .map(|e| {
                    let mut v = Rat::one();
                    for (k, &exp) in e.iter().enumerate() {
                        for _ in 0..exp {
                            v *= &p[k];
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let null = RatMat::from_rows(rows).nullspace();
    if null.is_empty() {
        return Ok(Vec::new());
    }
    let (echelon, pivots) = RatMat::from_rows(null).rref();
    let basis = (0..pivots.len())
        .map(|r| {
            let mut p = Poly3::zero();
            for (k, e) in monos.iter().enumerate() {
                let c = echelon[(r, k)].clone();
                if !c.is_zero() {
                    p.add_term(*e, c);
                }
            }
            p
        })
        .collect();
    Ok(basis)
}

/// True iff `p` lies in the rational span of `basis`.
pub fn in_span(p: &Poly3, basis: &[Poly3], degree: u32) -> bool {
    let monos = monomials_up_to(degree);
    let to_vec = |q: &Poly3| -> Vec<Rat> { monos.iter().map(|e| q.coeff(*e)).collect() };
    if basis.is_empty() {
        return p.is_zero();
    }
    let cols: Vec<Vec<Rat>> = basis.iter().map(to_vec).collect();
    let mat = RatMat::from_rows(cols).transpose();
    mat.solve(&to_vec(p)).is_some()
}

/// OBJ mesh over the parameter grid: vertices in grid order, quad faces
/// joining adjacent grid nodes (no wrap-around).
pub fn export_obj(sample: &LocusSample) -> Result<String, LocusError> {
    if sample.points.is_empty() {
        return Err(LocusError::EmptyGrid);
    }
    let nt = sample.spec.n_theta;
    let ns = sample.spec.n_second;
    let mut out = String::new();
    out.push_str(&format!("# curvature locus of {}\n", sample.germ_text));
    out.push_str(&format!(
        "# domain {} grid {}x{} c_max {}\n",
        match sample.domain {
            Domain::Cylinder => "cylinder",
            Domain::Sphere => "sphere",
        },
        nt,
        ns,
        sample.spec.c_max
    ));
    for (_, _, p) in &sample.points {
        out.push_str(&format!("v {} {} {}\n", p[0], p[1], p[2]));
    }
    for i in 0..nt.saturating_sub(1) {
        for j in 0..ns.saturating_sub(1) {
            let a = i * ns + j + 1;
            let b = (i + 1) * ns + j + 1;
            out.push_str(&format!("f {} {} {} {}\n", a, b, b + 1, a + 1));
        }
    }
    Ok(out)
}

/// CSV rows (theta, second parameter, normal point), one per grid node.
pub fn export_csv(sample: &LocusSample) -> Result<String, LocusError> {
    if sample.points.is_empty() {
        return Err(LocusError::EmptyGrid);
    }
    let mut out = String::from("theta,param2,n1,n2,n3\n");
    for (theta, p2, p) in &sample.points {
        out.push_str(&format!("{},{},{},{},{}\n", theta, p2, p[0], p[1], p[2]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{parse_germ, prepare, second_form_matrix, JetCoefficients};
    use crate::poly::{parse_poly, ratq};

    fn prepared(text: &str) -> PreparedGerm {
        prepare(&parse_germ(text).unwrap()).unwrap()
    }

    #[test]
    fn crosscap_singular_points() {
        let p = prepared("(x, y, x*z, y*z, z^2)");
        let m = second_form_matrix(&p);
        assert_eq!(
            eval_second_form(&m, &[rat(1), rat(0), rat(1)]),
            [rat(2), rat(0), rat(2)]
        );
        assert_eq!(
            eval_second_form(&m, &[rat(0), rat(1), rat(0)]),
            [rat(0), rat(0), rat(0)]
        );
    }

    #[test]
    fn lift_examples() {
        let p = prepared("(x, y, x*z, y*z, z^2)");
        assert_eq!(lift_to_regular(&p).to_text(), "(x, y, z, x*z, y*z, z^2)");
        let z = prepared("(x, y, 0, 0, 0)");
        assert_eq!(lift_to_regular(&z).to_text(), "(x, y, z, 0, 0, 0)");
        let e = prepared("(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)");
        assert_eq!(
            lift_to_regular(&e).to_text(),
            "(x, y, z, x^2 + y*z, x*z + y^2, x*y + z^2)"
        );
    }

    #[test]
    fn crosscap_locus_coefficients() {
        let c = regular_locus_coefficients(&lift_to_regular(&prepared("(x, y, x*z, y*z, z^2)")));
        assert_eq!(c.hvec, [rat(0), rat(0), ratq(2, 3)]);
        assert_eq!(c.b1, [rat(0), rat(0), ratq(1, 3)]);
        assert_eq!(c.b2, [rat(0), rat(0), rat(0)]);
        assert_eq!(c.b3, [rat(0), rat(0), rat(0)]);
        assert_eq!(c.b4, [rat(1), rat(0), rat(0)]);
        assert_eq!(c.b5, [rat(0), rat(1), rat(0)]);
    }

    #[test]
    fn crosscap_regular_locus_is_ellipsoid_parametrisation() {
        let c = regular_locus_coefficients(&lift_to_regular(&prepared("(x, y, x*z, y*z, z^2)")));
        for (theta, phi) in [(0.3, 1.1), (2.0, 0.4), (4.5, 2.7)] {
            let got = eval_regular_locus(&c, theta, phi);
            let want = [
                theta.cos() * (2.0 * phi).sin(),
                theta.sin() * (2.0 * phi).sin(),
                1.0 + (2.0 * phi).cos(),
            ];
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-12);
            }
        }
        // phi = pi/2, theta = 0 lands at the origin.
        let origin = eval_regular_locus(&c, 0.0, std::f64::consts::FRAC_PI_2);
        for v in origin {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn regular_locus_matches_second_form_exactly() {
        // The chart-free formula agrees with direct second-form evaluation
        // at rational unit vectors, exactly.
        for text in [
            "(x, y, x*z, y*z, z^2)",
            "(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)",
            "(x, y, 3*z^2, x*y + 1/2*x*z, y*z)",
            "(x, y, 3*z^2, x^2 + x*z + 1/2*z^2, y*z)",
        ] {
            let p = prepared(text);
            let reg = lift_to_regular(&p);
            let coeffs = regular_locus_coefficients(&reg);
            let m = reg.second_form_matrix();
            for (s, t) in [(rat(0), rat(0)), (rat(1), rat(2)), (ratq(1, 3), ratq(-2, 7))] {
                let [u, v, w] = rational_sphere_point(&s, &t);
                let got = eval_regular_locus_exact(&coeffs, &u, &v, &w);
                let want = eval_second_form(&m, &[u.clone(), v.clone(), w.clone()]);
                assert_eq!(got, want, "{text}");
            }
        }
    }

    #[test]
    fn north_pole_value_is_fzz() {
        let p = prepared("(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)");
        let reg = lift_to_regular(&p);
        let coeffs = regular_locus_coefficients(&reg);
        let got = eval_regular_locus(&coeffs, 0.0, 0.0);
        let m = reg.second_form_matrix();
        for k in 0..3 {
            assert!((got[k] - rat_to_f64(&m.rows[k][3])).abs() < 1e-12);
        }
    }

    #[test]
    fn veronese_values() {
        let v = veronese(&rat(1), &rat(0), &rat(0));
        assert_eq!(v[0], (rat(1), false));
        assert!(v[1..].iter().all(|(c, _)| c.is_zero()));
        let v = veronese(&ratq(3, 5), &rat(0), &ratq(4, 5));
        assert_eq!(v[0].0, ratq(9, 25));
        assert_eq!(v[2].0, ratq(16, 25));
        assert_eq!(v[4], (ratq(12, 25), true));
    }

    #[test]
    fn point_types() {
        let cross = prepared("(x, y, x*z, y*z, z^2)");
        assert_eq!(point_type(&second_form_matrix(&cross)).label(), "M3");
        let e46 = lift_to_regular(&prepared("(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)"));
        assert_eq!(point_type(&e46.second_form_matrix()).label(), "M3");
        let zero = prepared("(x, y, 0, 0, 0)");
        assert_eq!(point_type(&second_form_matrix(&zero)).label(), "M0");
    }

    #[test]
    fn affine_hull_dimensions() {
        for (text, dim) in [
            ("(x, y, x*z, y*z, z^2)", 3),
            ("(x, y, x*z, y*z, 0)", 2),
            ("(x, y, z^2, x*z, 0)", 2),
            ("(x, y, x*z, 0, 0)", 1),
            ("(x, y, z^2, 0, 0)", 1),
            ("(x, y, 0, 0, 0)", 0),
            // Not in the special class, still substantial.
            ("(x, y, x^2 + z^2, x*y + x*z, y^2)", 3),
        ] {
            let m = second_form_matrix(&prepared(text));
            assert_eq!(affine_hull_of_locus(&m, Domain::Cylinder).dim, dim, "{text}");
        }
    }

    #[test]
    fn hull_dimension_matches_exact_type_on_special_class() {
        for text in [
            "(x, y, x*z, y*z, z^2)",
            "(x, y, z^2, x*z, 0)",
            "(x, y, x*z, y*z, 0)",
            "(x, y, z^2, 0, 0)",
            "(x, y, x*z, 0, 0)",
            "(x, y, 0, 0, 0)",
        ] {
            let p = prepared(text);
            let ty =
                crate::classify::locus_type_exact(&JetCoefficients::from_prepared(&p)).unwrap();
            let m = second_form_matrix(&p);
            assert_eq!(
                affine_hull_of_locus(&m, Domain::Cylinder).dim,
                ty.affine_dimension(),
                "{text}"
            );
        }
    }

    #[test]
    fn blowup_residual_small_on_examples() {
        let spec = GridSpec::default();
        for text in [
            "(x, y, x*z, y*z, z^2)",
            "(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)",
            "(x, y, x^2 - 1/2*y*z, y^2 - 1/2*x*z, z^2 - 1/2*x*y)",
            "(x, y, 3*z^2, x*y + 1/2*x*z, y*z)",
            "(x, y, 3*z^2, x^2 + x*z + 1/2*z^2, y*z)",
            "(x, y, 0, 0, 0)",
        ] {
            let r = blowup_residual(&prepared(text), &spec).unwrap();
            assert!(r <= 1e-9, "{text}: residual {r}");
        }
    }

    #[test]
    fn fit_crosscap_singular_paraboloid() {
        let m = second_form_matrix(&prepared("(x, y, x*z, y*z, z^2)"));
        let ts: Vec<Rat> = (-4..=4).map(rat).collect();
        let cs: Vec<Rat> = (-3..=3).map(rat).collect();
        let pts = exact_cylinder_samples(&m, &ts, &cs);
        let basis = fit_vanishing_forms(&pts, 2).unwrap();
        // n1^2 + n2^2 - 2 n3 vanishes on the paraboloid.
        let target = parse_poly("x^2 + y^2 - 2*z").unwrap();
        assert!(in_span(&target, &basis, 2));
    }

    #[test]
    fn fit_crosscap_lift_ellipsoid() {
        let reg = lift_to_regular(&prepared("(x, y, x*z, y*z, z^2)"));
        let coeffs = regular_locus_coefficients(&reg);
        let mut pts = Vec::new();
        for s in -4..=4 {
            for t in -4..=4 {
                let [u, v, w] = rational_sphere_point(&rat(s), &rat(t));
                pts.push(eval_regular_locus_exact(&coeffs, &u, &v, &w));
            }
        }
        let basis = fit_vanishing_forms(&pts, 2).unwrap();
        // n1^2 + n2^2 + (n3 - 1)^2 = 1, i.e. n1^2 + n2^2 + n3^2 - 2 n3.
        let target = parse_poly("x^2 + y^2 + z^2 - 2*z").unwrap();
        assert!(in_span(&target, &basis, 2));
    }

    #[test]
    fn fit_rejects_non_paraboloid() {
        // (x, y, xz + y^2, yz, z^2): same orbit as the crosscap but the
        // locus is not a paraboloid; (2, 0, 0) violates the relation by 4.
        let m = second_form_matrix(&prepared("(x, y, x*z + y^2, y*z, z^2)"));
        let witness = eval_second_form(&m, &[rat(0), rat(1), rat(0)]);
        assert_eq!(witness, [rat(2), rat(0), rat(0)]);
        let target = parse_poly("x^2 + y^2 - 2*z").unwrap();
        let val = target.eval(&witness);
        assert_eq!(val, rat(4));
        let ts: Vec<Rat> = (-4..=4).map(rat).collect();
        let cs: Vec<Rat> = (-3..=3).map(rat).collect();
        let pts = exact_cylinder_samples(&m, &ts, &cs);
        let basis = fit_vanishing_forms(&pts, 2).unwrap();
        assert!(!in_span(&target, &basis, 2));
    }

    #[test]
    fn fit_degenerate_sample_error() {
        let pts = vec![[rat(1), rat(0), rat(0)]];
        assert!(matches!(
            fit_vanishing_forms(&pts, 2),
            Err(LocusError::DegenerateSample { .. })
        ));
    }

    #[test]
    fn obj_grid_combinatorics() {
        let p = prepared("(x, y, x*z, y*z, z^2)");
        let spec = GridSpec {
            n_theta: 8,
            n_second: 8,
            c_max: 2.0,
        };
        let sample = sample_singular_locus(&p, &spec).unwrap();
        let obj = export_obj(&sample).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 64);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 49);
        assert!(obj.starts_with("# curvature locus of (x, y, x*z, y*z, z^2)"));
    }

    #[test]
    fn csv_rows_and_header() {
        let p = prepared("(x, y, x*z, y*z, z^2)");
        let spec = GridSpec {
            n_theta: 4,
            n_second: 3,
            c_max: 1.0,
        };
        let sample = sample_singular_locus(&p, &spec).unwrap();
        let csv = export_csv(&sample).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,param2,n1,n2,n3"));
        assert_eq!(lines.count(), 12);
    }

    #[test]
    fn empty_grid_errors() {
        let sample = LocusSample {
            domain: Domain::Cylinder,
            spec: GridSpec::default(),
            points: Vec::new(),
            germ_text: String::new(),
        };
        assert!(matches!(export_obj(&sample), Err(LocusError::EmptyGrid)));
        assert!(matches!(export_csv(&sample), Err(LocusError::EmptyGrid)));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec { n_theta: 3, n_second: 5, c_max: 1.0 }.validate().is_err());
        assert!(GridSpec { n_theta: 8, n_second: 1, c_max: 1.0 }.validate().is_err());
        assert!(GridSpec { n_theta: 8, n_second: 5, c_max: 0.0 }.validate().is_err());
        assert!(GridSpec::default().validate().is_ok());
    }

    #[test]
    fn coefficient_normalization_identities() {
        let reg = lift_to_regular(&prepared("(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)"));
        let c = regular_locus_coefficients(&reg);
        let m = reg.second_form_matrix();
        for i in 0..3 {
            // H + 4 B1 = fzz.
            assert_eq!(&c.hvec[i] + rat(4) * &c.b1[i], m.rows[i][3]);
            // -12 B1 = fxx + fyy - 2 fzz.
            assert_eq!(
                rat(-12) * &c.b1[i],
                &m.rows[i][0] + &m.rows[i][2] - rat(2) * &m.rows[i][3]
            );
        }
    }
}
