//! Orbit classification of corank-1 2-jets, constructive reduction to the
//! six normal forms, isometric prenormal forms, and the exact
//! topological-type decision for jets without x^2, xy, y^2 terms.

use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::germ::{GermError, JetCoefficients, MapGerm};
use crate::linalg::RatMat;
use crate::poly::{rat, rat_to_f64, Poly3, Rat};

/// The six orbits of corank-1 2-jets, named after the surviving monomials
/// of the three normal components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orbit {
    #[serde(rename = "XZ_YZ_Z2")]
    XzYzZ2,
    #[serde(rename = "Z2_XZ")]
    Z2Xz,
    #[serde(rename = "XZ_YZ")]
    XzYz,
    #[serde(rename = "Z2")]
    Z2,
    #[serde(rename = "XZ")]
    Xz,
    #[serde(rename = "ZERO")]
    Zero,
}

impl Orbit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orbit::XzYzZ2 => "XZ_YZ_Z2",
            Orbit::Z2Xz => "Z2_XZ",
            Orbit::XzYz => "XZ_YZ",
            Orbit::Z2 => "Z2",
            Orbit::Xz => "XZ",
            Orbit::Zero => "ZERO",
        }
    }

    /// Normal-form monomials of the three normal components.
    pub fn normal_form_polys(&self) -> [Poly3; 3] {
        let xz = Poly3::monomial([1, 0, 1], rat(1));
        let yz = Poly3::monomial([0, 1, 1], rat(1));
        let z2 = Poly3::monomial([0, 0, 2], rat(1));
        let o = Poly3::zero();
        match self {
            Orbit::XzYzZ2 => [xz, yz, z2],
            Orbit::Z2Xz => [z2, xz, o],
            Orbit::XzYz => [xz, yz, o],
            Orbit::Z2 => [z2, o.clone(), o],
            Orbit::Xz => [xz, o.clone(), o],
            Orbit::Zero => [o.clone(), o.clone(), o],
        }
    }
}

impl std::fmt::Display for Orbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Topological types the curvature locus can take for jets in the special
/// class (no x^2, xy, y^2 terms), one per orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TopologicalType {
    SubstantialSurface,
    PlanarRegion,
    Plane,
    HalfLine,
    Line,
    Point,
}

impl TopologicalType {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologicalType::SubstantialSurface => "SubstantialSurface",
            TopologicalType::PlanarRegion => "PlanarRegion",
            TopologicalType::Plane => "Plane",
            TopologicalType::HalfLine => "HalfLine",
            TopologicalType::Line => "Line",
            TopologicalType::Point => "Point",
        }
    }

    /// Dimension of the affine hull of a locus of this type.
    pub fn affine_dimension(&self) -> usize {
        match self {
            TopologicalType::SubstantialSurface => 3,
            TopologicalType::PlanarRegion | TopologicalType::Plane => 2,
            TopologicalType::HalfLine | TopologicalType::Line => 1,
            TopologicalType::Point => 0,
        }
    }
}

impl std::fmt::Display for TopologicalType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("jet has nonzero x^2, xy or y^2 coefficients; the exact type decision only applies to the special class")]
    NotSpecialClass,
}

/// Orbit from the exact coefficient conditions: the determinant and rank of
/// the (z^2, xz, yz) coefficient matrix, plus whether its z^2 column
/// vanishes.
pub fn classify_orbit(j: &JetCoefficients) -> Orbit {
    if !j.d().is_zero() {
        return Orbit::XzYzZ2;
    }
    let z2 = j.z2_column_nonzero();
    match j.alpha_rank() {
        2 => {
            if z2 {
                Orbit::Z2Xz
            } else {
                Orbit::XzYz
            }
        }
        1 => {
            if z2 {
                Orbit::Z2
            } else {
                Orbit::Xz
            }
        }
        0 => Orbit::Zero,
        _ => unreachable!("alpha rank exceeds 2 only when D != 0"),
    }
}

pub fn is_non_degenerate(j: &JetCoefficients) -> bool {
    !j.d().is_zero()
}

/// Exact topological type of the curvature locus for special-class jets.
pub fn locus_type_exact(j: &JetCoefficients) -> Result<TopologicalType, ClassifyError> {
    if !j.is_special_class() {
        return Err(ClassifyError::NotSpecialClass);
    }
    Ok(match classify_orbit(j) {
        Orbit::XzYzZ2 => TopologicalType::SubstantialSurface,
        Orbit::Z2Xz => TopologicalType::PlanarRegion,
        Orbit::XzYz => TopologicalType::Plane,
        Orbit::Z2 => TopologicalType::HalfLine,
        Orbit::Xz => TopologicalType::Line,
        Orbit::Zero => TopologicalType::Point,
    })
}

/// Record of the exact coordinate changes carrying a 2-jet to its orbit
/// normal form.
///
/// The changes compose as: result components = (targetChange . input
/// components) o sourceChange, plus targetQuadratics (polynomials in x, y
/// only) added to the three normal components. The quadratic corrections
/// are the target-space shears that remove x^2, xy, y^2 terms; they are
/// quadratic parts of 2-jet target changes and cannot be folded into the
/// linear matrices.
#[derive(Debug, Clone)]
pub struct ReductionWitness {
    pub source_change: RatMat,
    pub target_change: RatMat,
    pub target_quadratics: [Poly3; 3],
    pub resulting_jet: JetCoefficients,
}

/// The five components (x, y, f1, f2, f3) of a prepared 2-jet.
pub fn jet_polys(j: &JetCoefficients) -> [Poly3; 5] {
    let [p, q, r] = j.to_normal_polys();
    [Poly3::var(0), Poly3::var(1), p, q, r]
}

/// Apply a witness to a jet and return the transformed jet, exactly.
pub fn apply_witness(j: &JetCoefficients, w: &ReductionWitness) -> JetCoefficients {
    let comps = jet_polys(j);
    let mut out: [Poly3; 5] = std::array::from_fn(|i| {
        let mut acc = Poly3::zero();
        for (k, c) in comps.iter().enumerate() {
            acc = acc.add(&c.scale(&w.target_change[(i, k)]));
        }
        acc
    });
    let m = mat3_to_rows(&w.source_change);
    for c in out.iter_mut() {
        *c = c.substitute_linear(&m).truncate(2);
    }
    for i in 0..3 {
        out[i + 2] = out[i + 2].add(&w.target_quadratics[i]);
    }
    assert_eq!(out[0], Poly3::var(0));
    assert_eq!(out[1], Poly3::var(1));
    JetCoefficients::from_normal_comps(&[&out[2], &out[3], &out[4]])
}

fn mat3_to_rows(m: &RatMat) -> [[Rat; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].clone()))
}

/// Exact pipeline state: current components plus accumulated linear source
/// and target changes. Mid-pipeline removals of x^2, xy, y^2 terms are done
/// directly on the components and recovered as the quadratic corrections at
/// the end.
struct Pipeline {
    comps: [Poly3; 5],
    s: RatMat,
    t: RatMat,
}

impl Pipeline {
    fn new(j: &JetCoefficients) -> Self {
        Pipeline {
            comps: jet_polys(j),
            s: RatMat::identity(3),
            t: RatMat::identity(5),
        }
    }

    fn target(&mut self, m: RatMat) {
        let old = self.comps.clone();
        for (i, slot) in self.comps.iter_mut().enumerate() {
            let mut acc = Poly3::zero();
            for (k, c) in old.iter().enumerate() {
                acc = acc.add(&c.scale(&m[(i, k)]));
            }
            *slot = acc;
        }
        self.t = m.matmul(&self.t);
    }

    /// Target change acting only on the three normal components.
    fn target_normal(&mut self, m3: &RatMat) {
        let mut m = RatMat::identity(5);
        for i in 0..3 {
            for k in 0..3 {
                m[(i + 2, k + 2)] = m3[(i, k)].clone();
            }
        }
        self.target(m);
    }

    /// Add `factor` times normal component `from` to normal component `to`.
    fn normal_shear(&mut self, to: usize, from: usize, factor: Rat) {
        let mut m = RatMat::identity(5);
        m[(to + 2, from + 2)] = factor;
        self.target(m);
    }

    fn swap_normals(&mut self, a: usize, b: usize) {
        let mut m = RatMat::identity(5);
        m[(a + 2, a + 2)] = Rat::zero();
        m[(b + 2, b + 2)] = Rat::zero();
        m[(a + 2, b + 2)] = rat(1);
        m[(b + 2, a + 2)] = rat(1);
        self.target(m);
    }

    fn scale_normal(&mut self, i: usize, factor: Rat) {
        let mut m = RatMat::identity(5);
        m[(i + 2, i + 2)] = factor;
        self.target(m);
    }

    fn source(&mut self, m: &RatMat) {
        let rows = mat3_to_rows(m);
        for c in self.comps.iter_mut() {
            *c = c.substitute_linear(&rows).truncate(2);
        }
        self.s = self.s.matmul(m);
    }

    /// Restore (x, y) in the first two components after a source change that
    /// mixed the tangent variables.
    fn fix_tangent(&mut self) {
        let mut a = RatMat::zeros(2, 2);
        for i in 0..2 {
            let lin = self.comps[i].linear_coeffs();
            assert!(lin[2].is_zero(), "tangent components must not involve z");
            a[(i, 0)] = lin[0].clone();
            a[(i, 1)] = lin[1].clone();
        }
        let inv = a.inverse().expect("tangent change invertible");
        let mut m = RatMat::identity(5);
        for i in 0..2 {
            for k in 0..2 {
                m[(i, k)] = inv[(i, k)].clone();
            }
        }
        self.target(m);
    }

    /// Drop x^2, xy, y^2 terms from the normal components; the effect is
    /// recovered in the witness's quadratic corrections.
    fn strip_xy_quadratics(&mut self) {
        for c in self.comps[2..].iter_mut() {
            for e in [[2, 0, 0], [1, 1, 0], [0, 2, 0]] {
                let v = c.coeff(e);
                if !v.is_zero() {
                    c.add_term(e, -v);
                }
            }
        }
    }

    /// Coefficient of monomial `e` in normal component `i`.
    fn ncoeff(&self, i: usize, e: crate::poly::Expo) -> Rat {
        self.comps[i + 2].coeff(e)
    }

    /// Source shear z -> z - p x - q y that removes the xz and yz terms of
    /// normal component `i` (whose z^2 coefficient must be nonzero).
    fn kill_xz_yz_by_z_shear(&mut self, i: usize) {
        let z2 = self.ncoeff(i, [0, 0, 2]);
        assert!(!z2.is_zero());
        let p = self.ncoeff(i, [1, 0, 1]) / (rat(2) * &z2);
        let q = self.ncoeff(i, [0, 1, 1]) / (rat(2) * &z2);
        let mut m = RatMat::identity(3);
        m[(2, 0)] = -p;
        m[(2, 1)] = -q;
        self.source(&m);
        self.strip_xy_quadratics();
    }

    fn finish(self, input: &JetCoefficients) -> ReductionWitness {
        // Recover the quadratic corrections from the linear part of the
        // composed changes.
        let base = jet_polys(input);
        let rows = mat3_to_rows(&self.s);
        let linear_only: [Poly3; 5] = std::array::from_fn(|i| {
            let mut acc = Poly3::zero();
            for (k, c) in base.iter().enumerate() {
                acc = acc.add(&c.scale(&self.t[(i, k)]));
            }
            acc.substitute_linear(&rows).truncate(2)
        });
        assert_eq!(self.comps[0], Poly3::var(0));
        assert_eq!(self.comps[1], Poly3::var(1));
        let quads: [Poly3; 3] = std::array::from_fn(|i| {
            let q = self.comps[i + 2].sub(&linear_only[i + 2]);
            for (e, _) in q.terms() {
                assert_eq!(e[2], 0, "quadratic corrections involve x, y only");
            }
            q
        });
        let resulting_jet = JetCoefficients::from_normal_comps(&[
            &self.comps[2],
            &self.comps[3],
            &self.comps[4],
        ]);
        ReductionWitness {
            source_change: self.s,
            target_change: self.t,
            target_quadratics: quads,
            resulting_jet,
        }
    }
}

/// Constructive reduction of a corank-1 2-jet to its orbit normal form,
/// returning the exact coordinate changes. Pivots are chosen
/// deterministically: the z^2 pivot scans the third, second, first normal
/// components in that order.
pub fn reduce_to_orbit_normal_form(j: &JetCoefficients) -> ReductionWitness {
    let orbit = classify_orbit(j);
    let mut p = Pipeline::new(j);
    p.strip_xy_quadratics();

    match orbit {
        Orbit::XzYzZ2 => reduce_full_rank(&mut p),
        Orbit::Z2Xz | Orbit::XzYz => reduce_rank_two(&mut p, orbit),
        Orbit::Z2 | Orbit::Xz => reduce_rank_one(&mut p, orbit),
        Orbit::Zero => {}
    }

    let w = p.finish(j);
    let nf = orbit.normal_form_polys();
    debug_assert_eq!(w.resulting_jet.to_normal_polys(), nf);
    w
}

fn z2_pivot(p: &Pipeline) -> Option<usize> {
    [2usize, 1, 0]
        .into_iter()
        .find(|&i| !p.ncoeff(i, [0, 0, 2]).is_zero())
}

fn reduce_full_rank(p: &mut Pipeline) {
    // Move a nonzero z^2 coefficient into the last normal component.
    let k = z2_pivot(p).expect("D != 0 forces a nonzero z^2 coefficient");
    if k != 2 {
        p.swap_normals(k, 2);
    }
    let c21 = p.ncoeff(2, [0, 0, 2]);
    // Clear z^2 from the first two normal components.
    p.normal_shear(0, 2, -p.ncoeff(0, [0, 0, 2]) / &c21);
    p.normal_shear(1, 2, -p.ncoeff(1, [0, 0, 2]) / &c21);
    // Now components 0, 1 are combinations of xz, yz; diagonalize them.
    if p.ncoeff(0, [1, 0, 1]).is_zero() || p.ncoeff(1, [0, 1, 1]).is_zero() {
        p.swap_normals(0, 1);
    }
    let a22 = p.ncoeff(0, [1, 0, 1]);
    let b12 = p.ncoeff(1, [0, 1, 1]);
    assert!(!a22.is_zero() && !b12.is_zero());
    let mut m = RatMat::identity(3);
    m[(0, 1)] = -p.ncoeff(0, [0, 1, 1]) / &b12;
    m[(1, 0)] = -p.ncoeff(1, [1, 0, 1]) / &a22;
    p.target_normal(&m);
    // Normalize the three pivots and clear the leftover xz, yz of the last
    // component.
    p.scale_normal(0, p.ncoeff(0, [1, 0, 1]).recip());
    p.scale_normal(1, p.ncoeff(1, [0, 1, 1]).recip());
    p.scale_normal(2, p.ncoeff(2, [0, 0, 2]).recip());
    p.normal_shear(2, 0, -p.ncoeff(2, [1, 0, 1]));
    p.normal_shear(2, 1, -p.ncoeff(2, [0, 1, 1]));
}

fn reduce_rank_two(p: &mut Pipeline, orbit: Orbit) {
    // The three coefficient rows are dependent; send the dependency to the
    // last normal component.
    let alpha = current_alpha(p);
    let left_null = alpha.transpose().nullspace();
    let v = left_null.first().expect("rank 2 has a left null vector");
    let k = [2usize, 1, 0]
        .into_iter()
        .find(|&i| !v[i].is_zero())
        .expect("null vector nonzero");
    let mut m = RatMat::zeros(3, 3);
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    m[(0, others[0])] = rat(1);
    m[(1, others[1])] = rat(1);
    for i in 0..3 {
        m[(2, i)] = v[i].clone();
    }
    assert!(!m.det().is_zero());
    p.target_normal(&m);
    debug_assert!(p.comps[4]
        .terms()
        .all(|(e, _)| e[2] == 0));
    // Drop the x,y-quadratic residue of the zeroed component.
    p.strip_xy_quadratics();

    match orbit {
        Orbit::Z2Xz => {
            if p.ncoeff(0, [0, 0, 2]).is_zero() {
                p.swap_normals(0, 1);
            }
            let a21 = p.ncoeff(0, [0, 0, 2]);
            assert!(!a21.is_zero());
            p.normal_shear(1, 0, -p.ncoeff(1, [0, 0, 2]) / &a21);
            p.kill_xz_yz_by_z_shear(0);
            p.scale_normal(0, p.ncoeff(0, [0, 0, 2]).recip());
            // Second component is now a combination of xz, yz; align it
            // with xz by mixing the tangent variables.
            if p.ncoeff(1, [1, 0, 1]).is_zero() {
                swap_tangent(p);
            }
            let b22 = p.ncoeff(1, [1, 0, 1]);
            let mut m = RatMat::identity(3);
            m[(0, 1)] = -p.ncoeff(1, [0, 1, 1]) / &b22;
            p.source(&m);
            p.fix_tangent();
            p.strip_xy_quadratics();
            p.scale_normal(1, p.ncoeff(1, [1, 0, 1]).recip());
        }
        Orbit::XzYz => {
            // Both rows are xz, yz combinations with invertible 2x2 matrix.
            let m2 = RatMat::from_rows(vec![
                vec![p.ncoeff(0, [1, 0, 1]), p.ncoeff(0, [0, 1, 1])],
                vec![p.ncoeff(1, [1, 0, 1]), p.ncoeff(1, [0, 1, 1])],
            ]);
            let inv = m2.inverse().expect("rank two");
            let mut m = RatMat::identity(3);
            for i in 0..2 {
                for k in 0..2 {
                    m[(i, k)] = inv[(i, k)].clone();
                }
            }
            p.target_normal(&m);
        }
        _ => unreachable!(),
    }
}

fn reduce_rank_one(p: &mut Pipeline, orbit: Orbit) {
    // Rotate the one-dimensional row space into the first normal component.
    let alpha = current_alpha(p);
    let k = (0..3)
        .find(|&i| alpha.row(i).iter().any(|v| !v.is_zero()))
        .expect("rank 1");
    let left_null = alpha.transpose().nullspace();
    assert_eq!(left_null.len(), 2);
    let mut m = RatMat::zeros(3, 3);
    m[(0, k)] = rat(1);
    for (r, v) in left_null.iter().enumerate() {
        for i in 0..3 {
            m[(r + 1, i)] = v[i].clone();
        }
    }
    assert!(!m.det().is_zero());
    p.target_normal(&m);
    p.strip_xy_quadratics();

    match orbit {
        Orbit::Z2 => {
            p.kill_xz_yz_by_z_shear(0);
            p.scale_normal(0, p.ncoeff(0, [0, 0, 2]).recip());
        }
        Orbit::Xz => {
            if p.ncoeff(0, [1, 0, 1]).is_zero() {
                swap_tangent(p);
            }
            let a22 = p.ncoeff(0, [1, 0, 1]);
            let mut m = RatMat::identity(3);
            m[(0, 1)] = -p.ncoeff(0, [0, 1, 1]) / &a22;
            p.source(&m);
            p.fix_tangent();
            p.strip_xy_quadratics();
            p.scale_normal(0, p.ncoeff(0, [1, 0, 1]).recip());
        }
        _ => unreachable!(),
    }
}

fn current_alpha(p: &Pipeline) -> RatMat {
    RatMat::from_rows(
        (0..3)
            .map(|i| {
                vec![
                    p.ncoeff(i, [0, 0, 2]),
                    p.ncoeff(i, [1, 0, 1]),
                    p.ncoeff(i, [0, 1, 1]),
                ]
            })
            .collect(),
    )
}

fn swap_tangent(p: &mut Pipeline) {
    let mut m = RatMat::identity(3);
    m[(0, 0)] = Rat::zero();
    m[(1, 1)] = Rat::zero();
    m[(0, 1)] = rat(1);
    m[(1, 0)] = rat(1);
    p.source(&m);
    p.fix_tangent();
}

/// Transform the normal part of a jet by an invertible mixing of the
/// normal components and a kernel-respecting linear source change
/// (z must not appear in the images of x and y, i.e. m[0][2] = m[1][2] = 0).
pub fn transform_jet(j: &JetCoefficients, source: &RatMat, normal_mix: &RatMat) -> JetCoefficients {
    assert!(source[(0, 2)].is_zero() && source[(1, 2)].is_zero());
    assert!(!source.det().is_zero() && !normal_mix.det().is_zero());
    let rows = mat3_to_rows(source);
    let polys = j.to_normal_polys();
    let subbed: [Poly3; 3] = std::array::from_fn(|i| polys[i].substitute_linear(&rows).truncate(2));
    let mixed: [Poly3; 3] = std::array::from_fn(|i| {
        let mut acc = Poly3::zero();
        for (k, c) in subbed.iter().enumerate() {
            acc = acc.add(&c.scale(&normal_mix[(i, k)]));
        }
        acc
    });
    JetCoefficients::from_normal_comps(&[&mixed[0], &mixed[1], &mixed[2]])
}

// ---------------------------------------------------------------------------
// Isometric prenormal forms
// ---------------------------------------------------------------------------

/// Result of reducing a corank-1 germ by source changes and target
/// isometries: the 18 quadratic coefficients in the case shape of the
/// orbit, plus the rotations used. Columns of `rows` are ordered
/// (x^2, xy, y^2, z^2, xz, yz). Suppressed coefficients are checked against
/// 1e-12 and snapped to exact zero.
#[derive(Debug, Clone)]
pub struct PrenormalForm {
    pub orbit: Orbit,
    pub rows: [[f64; 6]; 3],
    /// Rotation applied to the normal frame {e3, e4, e5}.
    pub normal_rotation: [[f64; 3]; 3],
    /// Rotation applied to the tangent target coordinates (and matching
    /// source rotation of x, y).
    pub tangent_rotation: [[f64; 2]; 2],
    /// Linear source change, rows give old variables in terms of new.
    pub source_change: [[f64; 3]; 3],
}

const SNAP_TOL: f64 = 1e-12;

/// Quadratic rows as 3x3 symmetric matrices for easy substitution.
#[derive(Clone)]
struct FloatJet {
    rows: [[[f64; 3]; 3]; 3],
    normal_rot: [[f64; 3]; 3],
    tangent_rot: [[f64; 2]; 2],
    source: [[f64; 3]; 3],
}

fn sym_from_coeffs(c: &[f64; 6]) -> [[f64; 3]; 3] {
    let [x2, xy, y2, z2, xz, yz] = *c;
    [
        [x2, xy / 2.0, xz / 2.0],
        [xy / 2.0, y2, yz / 2.0],
        [xz / 2.0, yz / 2.0, z2],
    ]
}

fn coeffs_from_sym(m: &[[f64; 3]; 3]) -> [f64; 6] {
    [
        m[0][0],
        2.0 * m[0][1],
        m[1][1],
        m[2][2],
        2.0 * m[0][2],
        2.0 * m[1][2],
    ]
}

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat3_transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

impl FloatJet {
    fn new(j: &JetCoefficients) -> Self {
        let rows = std::array::from_fn(|i| {
            let c: [f64; 6] = std::array::from_fn(|k| rat_to_f64(&j.rows[i][k]));
            sym_from_coeffs(&c)
        });
        FloatJet {
            rows,
            normal_rot: ident3(),
            tangent_rot: [[1.0, 0.0], [0.0, 1.0]],
            source: ident3(),
        }
    }

    fn coeff_rows(&self) -> [[f64; 6]; 3] {
        std::array::from_fn(|i| coeffs_from_sym(&self.rows[i]))
    }

    fn coeff(&self, row: usize, col: usize) -> f64 {
        self.coeff_rows()[row][col]
    }

    /// Source substitution v = S v' (rows of S give old variables in the
    /// new ones).
    fn apply_source(&mut self, s: &[[f64; 3]; 3]) {
        let st = mat3_transpose(s);
        for r in self.rows.iter_mut() {
            *r = mat3_mul(&st, &mat3_mul(r, s));
        }
        self.source = mat3_mul(&self.source, s);
    }

    /// Rotate normal components i and j by angle theta:
    /// row_i' = cos t row_i + sin t row_j, row_j' = -sin t row_i + cos t row_j.
    fn rotate_normals(&mut self, i: usize, j: usize, theta: f64) {
        let (s, c) = theta.sin_cos();
        let mut g = ident3();
        g[i][i] = c;
        g[i][j] = s;
        g[j][i] = -s;
        g[j][j] = c;
        let ri = self.rows[i];
        let rj = self.rows[j];
        for a in 0..3 {
            for b in 0..3 {
                self.rows[i][a][b] = c * ri[a][b] + s * rj[a][b];
                self.rows[j][a][b] = -s * ri[a][b] + c * rj[a][b];
            }
        }
        self.normal_rot = mat3_mul(&g, &self.normal_rot);
    }

    /// Apply a general rotation to the normal frame: rows' = g . rows.
    fn mix_normals(&mut self, g: &[[f64; 3]; 3]) {
        let old = self.rows;
        for i in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    self.rows[i][a][b] =
                        g[i][0] * old[0][a][b] + g[i][1] * old[1][a][b] + g[i][2] * old[2][a][b];
                }
            }
        }
        self.normal_rot = mat3_mul(g, &self.normal_rot);
    }

    /// Rotate the tangent plane by angle psi in both source and target so
    /// the first two components stay (x, y).
    fn rotate_tangent(&mut self, psi: f64) {
        let (s, c) = psi.sin_cos();
        // Source: x = c x' - s y', y = s x' + c y'.
        self.apply_source(&[[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]);
        let g = [[c, -s], [s, c]];
        let t = self.tangent_rot;
        self.tangent_rot = [
            [
                g[0][0] * t[0][0] + g[0][1] * t[1][0],
                g[0][0] * t[0][1] + g[0][1] * t[1][1],
            ],
            [
                g[1][0] * t[0][0] + g[1][1] * t[1][0],
                g[1][0] * t[0][1] + g[1][1] * t[1][1],
            ],
        ];
    }

    /// Source shear z -> z' - p x - q y.
    fn z_shear(&mut self, px: f64, qy: f64) {
        self.apply_source(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-px, -qy, 1.0]]);
    }

    fn z_scale(&mut self, factor: f64) {
        self.apply_source(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, factor]]);
    }

    fn magnitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in &self.coeff_rows() {
            for v in r {
                m = m.max(v.abs());
            }
        }
        m
    }

    fn snap(&mut self, pattern: &[[bool; 6]; 3]) {
        let scale = self.magnitude().max(1.0);
        let mut coeffs = self.coeff_rows();
        for i in 0..3 {
            for k in 0..6 {
                if !pattern[i][k] {
                    assert!(
                        coeffs[i][k].abs() <= SNAP_TOL * scale,
                        "coefficient ({i},{k}) = {} should be suppressed",
                        coeffs[i][k]
                    );
                    coeffs[i][k] = 0.0;
                }
            }
        }
        for i in 0..3 {
            self.rows[i] = sym_from_coeffs(&coeffs[i]);
        }
    }
}

fn ident3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

const T: bool = true;
const F: bool = false;

/// Reduce a corank-1 germ to the isometric prenormal shape of its orbit
/// using source changes and target isometries only. The suppressed-entry
/// pattern is asserted at 1e-12 and snapped to zero.
pub fn reduce_isometric_prenormal(g: &MapGerm) -> Result<PrenormalForm, GermError> {
    let prepared = crate::germ::prepare(g)?;
    let jet = JetCoefficients::from_prepared(&prepared);
    Ok(reduce_isometric_prenormal_jet(&jet))
}

pub fn reduce_isometric_prenormal_jet(jet: &JetCoefficients) -> PrenormalForm {
    let orbit = classify_orbit(jet);
    let mut fj = FloatJet::new(jet);
    let pattern = match orbit {
        Orbit::XzYzZ2 => {
            reduce_prenormal_full(&mut fj);
            // a: a1 x^2 + a3 y^2 + xz + a6 yz
            // b: b1 x^2 + b2 xy + b3 y^2 + b6 yz
            // c: unrestricted
            [
                [T, F, T, F, T, T],
                [T, T, T, F, F, T],
                [T, T, T, T, T, T],
            ]
        }
        Orbit::Z2Xz => {
            reduce_prenormal_rank2_z2(&mut fj);
            [
                [T, T, T, T, T, F],
                [T, T, T, F, T, F],
                [T, T, T, F, F, F],
            ]
        }
        Orbit::XzYz => {
            reduce_prenormal_rank2_flat(&mut fj);
            [
                [T, F, T, F, T, F],
                [T, F, T, F, T, T],
                [T, T, T, F, F, F],
            ]
        }
        Orbit::Z2 => {
            reduce_prenormal_rank1_z2(&mut fj);
            [
                [T, T, T, T, F, F],
                [T, T, T, F, F, F],
                [T, T, T, F, F, F],
            ]
        }
        Orbit::Xz => {
            reduce_prenormal_rank1_flat(&mut fj);
            [
                [F, F, T, F, T, F],
                [T, T, T, F, F, F],
                [T, T, T, F, F, F],
            ]
        }
        Orbit::Zero => [
            [T, T, T, F, F, F],
            [T, T, T, F, F, F],
            [T, T, T, F, F, F],
        ],
    };
    fj.snap(&pattern);
    PrenormalForm {
        orbit,
        rows: fj.coeff_rows(),
        normal_rotation: fj.normal_rot,
        tangent_rotation: fj.tangent_rot,
        source_change: fj.source,
    }
}

/// Orbit (x, y, xz, yz, z^2): the rotation pipeline with three normal-frame
/// rotations, two z-shears and a z-scale.
fn reduce_prenormal_full(fj: &mut FloatJet) {
    // z^2 pivot into the last row, scanning c, b, a.
    let scale = fj.magnitude().max(1.0);
    let pivot = [2usize, 1, 0]
        .into_iter()
        .find(|&i| fj.coeff(i, 3).abs() > 1e-9 * scale)
        .expect("nonzero z^2 coefficient when D != 0");
    if pivot != 2 {
        // Quarter-turn in the (pivot, 2) normal plane is an isometry.
        fj.rotate_normals(pivot, 2, std::f64::consts::FRAC_PI_2);
    }
    let c21 = fj.coeff(2, 3);
    // Kill xz, yz of the last row.
    fj.z_shear(fj.coeff(2, 4) / (2.0 * c21), fj.coeff(2, 5) / (2.0 * c21));
    // R1: zero the xz coefficient of row b.
    let th1 = fj.coeff(1, 4).atan2(fj.coeff(0, 4));
    fj.rotate_normals(0, 1, th1);
    // R2: zero the z^2 coefficient of row b (rotating rows b, c); the
    // opposite sign from R1 so the pivot row accumulates the magnitude.
    let th2 = fj.coeff(1, 3).atan2(fj.coeff(2, 3));
    fj.rotate_normals(1, 2, -th2);
    // R3: zero the z^2 coefficient of row a (rotating rows a, c).
    let th3 = fj.coeff(0, 3).atan2(fj.coeff(2, 3));
    fj.rotate_normals(0, 2, -th3);
    // Source shear removing the xy term of row a, then normalize its xz
    // coefficient to 1 by scaling z.
    let a22 = fj.coeff(0, 4);
    fj.apply_source(&[
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -fj.coeff(0, 1) / a22, 1.0],
    ]);
    fj.z_scale(1.0 / fj.coeff(0, 4));
}

/// Rotation sending the unit vector u to the last coordinate axis; rows of
/// the result form an orthonormal frame.
fn frame_with_last(u: [f64; 3]) -> [[f64; 3]; 3] {
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let w = [u[0] / n, u[1] / n, u[2] / n];
    // Pick the coordinate axis least aligned with w.
    let k = (0..3)
        .min_by(|&a, &b| w[a].abs().partial_cmp(&w[b].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d = e[0] * w[0] + e[1] * w[1] + e[2] * w[2];
    let mut v1 = [e[0] - d * w[0], e[1] - d * w[1], e[2] - d * w[2]];
    let n1 = (v1[0] * v1[0] + v1[1] * v1[1] + v1[2] * v1[2]).sqrt();
    for x in v1.iter_mut() {
        *x /= n1;
    }
    let v2 = [
        w[1] * v1[2] - w[2] * v1[1],
        w[2] * v1[0] - w[0] * v1[2],
        w[0] * v1[1] - w[1] * v1[0],
    ];
    [v1, v2, w]
}

/// Left null direction of the (z^2, xz, yz) part, i.e. the combination of
/// rows that vanishes.
fn left_null_direction(fj: &FloatJet) -> [f64; 3] {
    // Cross products of the rank-deficient row vectors in coefficient
    // space; pick the most stable pair.
    let rows: [[f64; 3]; 3] =
        std::array::from_fn(|i| [fj.coeff(i, 3), fj.coeff(i, 4), fj.coeff(i, 5)]);
    // Solve v . rows = 0 via the cross product of two columns of the
    // transposed matrix: v is orthogonal to all three columns (z^2, xz, yz
    // coefficient vectors across rows).
    let cols: [[f64; 3]; 3] = std::array::from_fn(|k| [rows[0][k], rows[1][k], rows[2][k]]);
    let mut best = [0.0; 3];
    let mut best_n = -1.0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            let c = [
                cols[a][1] * cols[b][2] - cols[a][2] * cols[b][1],
                cols[a][2] * cols[b][0] - cols[a][0] * cols[b][2],
                cols[a][0] * cols[b][1] - cols[a][1] * cols[b][0],
            ];
            let n = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            if n > best_n {
                best_n = n;
                best = c;
            }
        }
    }
    best
}

/// Orbit (x, y, z^2, xz, 0): case shape with a4 > 0, xz coefficient 1 in
/// the second component, z-free third component.
fn reduce_prenormal_rank2_z2(fj: &mut FloatJet) {
    // Rotate the dependent combination of rows into the last slot.
    let u = left_null_direction(fj);
    let frame = frame_with_last(u);
    fj.mix_normals(&frame);
    // Move the z^2 content into row a and make it positive.
    let th = fj.coeff(1, 3).atan2(fj.coeff(0, 3));
    fj.rotate_normals(0, 1, th);
    // Align row b's (xz, yz) direction with xz via a tangent rotation.
    let psi = fj.coeff(1, 5).atan2(fj.coeff(1, 4));
    fj.rotate_tangent(psi);
    // Remove xz, yz from row a.
    let a21 = fj.coeff(0, 3);
    fj.z_shear(fj.coeff(0, 4) / (2.0 * a21), fj.coeff(0, 5) / (2.0 * a21));
    // Normalize row b's xz coefficient to 1 (keeps a4 = a21 / s^2 > 0).
    fj.z_scale(1.0 / fj.coeff(1, 4));
}

/// Orbit (x, y, xz, yz, 0): xz coefficient 1 and no xy in the first two
/// components.
fn reduce_prenormal_rank2_flat(fj: &mut FloatJet) {
    let u = left_null_direction(fj);
    let frame = frame_with_last(u);
    fj.mix_normals(&frame);
    // Align row a's (xz, yz) direction with xz.
    let psi = fj.coeff(0, 5).atan2(fj.coeff(0, 4));
    fj.rotate_tangent(psi);
    fj.z_scale(1.0 / fj.coeff(0, 4));
    // Joint shear z -> z' - mu x - lambda y clearing the xy terms of rows
    // a and b.
    let lambda = fj.coeff(0, 1);
    let b6 = fj.coeff(1, 5);
    let mu = (fj.coeff(1, 1) - lambda * fj.coeff(1, 4)) / b6;
    fj.z_shear(mu, lambda);
}

/// Orbit (x, y, z^2, 0, 0): z^2 coefficient normalized to 1.
fn reduce_prenormal_rank1_z2(fj: &mut FloatJet) {
    concentrate_rank_one(fj);
    let a21 = fj.coeff(0, 3);
    fj.z_shear(fj.coeff(0, 4) / (2.0 * a21), fj.coeff(0, 5) / (2.0 * a21));
    if fj.coeff(0, 3) < 0.0 {
        fj.rotate_normals(0, 1, std::f64::consts::PI);
    }
    fj.z_scale(1.0 / fj.coeff(0, 3).sqrt());
}

/// Orbit (x, y, xz, 0, 0): first component a3 y^2 + xz.
fn reduce_prenormal_rank1_flat(fj: &mut FloatJet) {
    concentrate_rank_one(fj);
    let psi = fj.coeff(0, 5).atan2(fj.coeff(0, 4));
    fj.rotate_tangent(psi);
    fj.z_scale(1.0 / fj.coeff(0, 4));
    // Clear x^2 and xy of row a: xz -> x(z' - mu x - lambda y).
    fj.z_shear(fj.coeff(0, 0), fj.coeff(0, 1));
}

/// Rotate the normal frame so the single independent coefficient row sits
/// in the first slot and the other two rows have no z-terms.
fn concentrate_rank_one(fj: &mut FloatJet) {
    let rows: [[f64; 3]; 3] =
        std::array::from_fn(|i| [fj.coeff(i, 3), fj.coeff(i, 4), fj.coeff(i, 5)]);
    // Weights t with row_i = t_i * r; use norms with signs relative to the
    // largest row.
    let norms: [f64; 3] = std::array::from_fn(|i| {
        (rows[i][0] * rows[i][0] + rows[i][1] * rows[i][1] + rows[i][2] * rows[i][2]).sqrt()
    });
    let k = (0..3)
        .max_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap())
        .unwrap();
    let t: [f64; 3] = std::array::from_fn(|i| {
        let d: f64 = (0..3).map(|j| rows[i][j] * rows[k][j]).sum();
        d / norms[k]
    });
    let frame = frame_with_last(t);
    // frame sends t to the last axis; we want it in the first slot.
    let reorder = [frame[2], frame[0], frame[1]];
    fj.mix_normals(&reorder);
}
