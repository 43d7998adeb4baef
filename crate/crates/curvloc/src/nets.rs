//! Real nets of ternary quadrics: pencil matrices, discriminant cubics,
//! the catalogue of normal forms with their printed discriminants, the
//! two generic families, region labels in the (c, g) parameter plane, the
//! GL(3) x GL(3) action, the bridge to Monge-form regular germs, and the
//! worked equivalence chain showing that G-equivalent nets can have
//! curvature loci of different shapes.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::RatMat;
use crate::locus::{
    affine_hull_of_locus, eval_regular_locus_exact, fit_vanishing_forms, point_type,
    rational_sphere_point, regular_locus_coefficients, Domain, RegularGerm,
};
use crate::poly::{parse_poly_tuple, poly_to_string_named, rat, ratq, Poly3, Rat};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("parse error at {0}: {1}")]
    Parse(usize, String),
    #[error("quadratic form expected, found a term of degree {0}")]
    NotQuadratic(u32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("unknown normal-form label {0:?}")]
    UnknownLabel(String),
}

/// A ternary quadratic form stored as a symmetric 3x3 rational matrix, so
/// q(x) = x^T A x and a mixed term "2xy" contributes off-diagonal entries 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm3 {
    pub m: [[Rat; 3]; 3],
}

impl QuadraticForm3 {
    pub fn zero() -> Self {
        QuadraticForm3 {
            m: std::array::from_fn(|_| std::array::from_fn(|_| Rat::zero())),
        }
    }

    pub fn from_poly(p: &Poly3) -> Result<Self, NetError> {
        let mut q = QuadraticForm3::zero();
        for (e, c) in p.terms() {
            let d = e[0] + e[1] + e[2];
            if d != 2 {
                return Err(NetError::NotQuadratic(d));
            }
            let vars: Vec<usize> = (0..3).filter(|&k| e[k] > 0).collect();
            match vars.as_slice() {
                [i] => q.m[*i][*i] = c.clone(),
                [i, j] => {
                    let half = c / rat(2);
                    q.m[*i][*j] = half.clone();
                    q.m[*j][*i] = half;
                }
                _ => unreachable!(),
            }
        }
        Ok(q)
    }

    pub fn to_poly(&self) -> Poly3 {
        let mut p = Poly3::zero();
        for i in 0..3 {
            for j in i..3 {
                let c = if i == j {
                    self.m[i][i].clone()
                } else {
                    rat(2) * &self.m[i][j]
                };
                if !c.is_zero() {
                    let mut e = [0u32; 3];
                    e[i] += 1;
                    e[j] += 1;
                    p.add_term(e, c);
                }
            }
        }
        p
    }

    pub fn to_ratmat(&self) -> RatMat {
        RatMat::from_rows(self.m.iter().map(|r| r.to_vec()).collect())
    }
}

/// A net of quadrics: the span of three ternary quadratic forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub q: [QuadraticForm3; 3],
}

impl Net {
    pub fn from_polys(ps: &[Poly3; 3]) -> Result<Self, NetError> {
        Ok(Net {
            q: [
                QuadraticForm3::from_poly(&ps[0])?,
                QuadraticForm3::from_poly(&ps[1])?,
                QuadraticForm3::from_poly(&ps[2])?,
            ],
        })
    }

    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.q.iter().map(|f| f.to_poly().to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

/// Parse "(q1, q2, q3)" with the germ grammar; each component must be a
/// homogeneous quadratic.
pub fn parse_net(src: &str) -> Result<Net, NetError> {
    let polys = parse_poly_tuple(src).map_err(|e| NetError::Parse(e.position, e.message))?;
    if polys.len() != 3 {
        return Err(NetError::Parse(0, format!("expected 3 forms, found {}", polys.len())));
    }
    Net::from_polys(&[polys[0].clone(), polys[1].clone(), polys[2].clone()])
}

/// The matrix of lambda q1 + mu q2 + nu q3.
pub fn pencil_matrix(n: &Net, lambda: &Rat, mu: &Rat, nu: &Rat) -> RatMat {
    let mut rows = vec![vec![Rat::zero(); 3]; 3];
    for (w, f) in [lambda, mu, nu].into_iter().zip(&n.q) {
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] += w * &f.m[i][j];
            }
        }
    }
    RatMat::from_rows(rows)
}

/// The determinant of the symbolic pencil: a cubic in (lambda, mu, nu),
/// represented as a polynomial in variables (0, 1, 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicForm3 {
    pub poly: Poly3,
}

impl CubicForm3 {
    /// Canonical text with integral content factored out and the leading
    /// graded-lex coefficient made positive.
    pub fn to_text(&self) -> String {
        let (scale, prim) = primitive_part(&self.poly);
        if prim.is_zero() {
            return "0".to_string();
        }
        let body = poly_to_string_named(&prim, &["l", "m", "n"]);
        if scale.is_one() {
            body
        } else {
            format!("{} * ({})", crate::poly::rat_to_string(&scale), body)
        }
    }
}

/// Factor a polynomial as scale * primitive where the primitive part has
/// integer coprime coefficients and positive leading (graded lex) term.
pub fn primitive_part(p: &Poly3) -> (Rat, Poly3) {
    if p.is_zero() {
        return (Rat::one(), Poly3::zero());
    }
    let coeffs: Vec<Rat> = p.terms().map(|(_, c)| c.clone()).collect();
    let mut num_gcd = num::BigInt::zero();
    let mut den_lcm = num::BigInt::one();
    for c in &coeffs {
        num_gcd = num::Integer::gcd(&num_gcd, c.numer());
        den_lcm = num::Integer::lcm(&den_lcm, c.denom());
    }
    let mut scale = Rat::new(num_gcd, den_lcm);
    // Leading term: largest exponent in the map's ordering is fine as long
    // as it is deterministic; use the printer's leading (first) term sign.
    let lead = p
        .terms()
        .map(|(e, c)| (*e, c.clone()))
        .max_by_key(|(e, _)| (e[0] + e[1] + e[2], e[0], e[1]))
        .unwrap();
    if (lead.1.clone() / &scale).is_negative() {
        scale = -scale;
    }
    (scale.clone(), p.scale(&(Rat::one() / scale)))
}

pub fn discriminant_cubic(n: &Net) -> CubicForm3 {
    // Symbolic 3x3 determinant of sum w_k A_k with w = (lambda, mu, nu).
    let entry = |i: usize, j: usize| -> Poly3 {
        let mut p = Poly3::zero();
        for (k, f) in n.q.iter().enumerate() {
            if !f.m[i][j].is_zero() {
                p.add_term(
                    [(k == 0) as u32, (k == 1) as u32, (k == 2) as u32],
                    f.m[i][j].clone(),
                );
            }
        }
        p
    };
    let e: Vec<Vec<Poly3>> = (0..3).map(|i| (0..3).map(|j| entry(i, j)).collect()).collect();
    let minor = |a: &Poly3, b: &Poly3, c: &Poly3, d: &Poly3| a.mul(d).sub(&b.mul(c));
    let det = e[0][0]
        .mul(&minor(&e[1][1], &e[1][2], &e[2][1], &e[2][2]))
        .sub(&e[0][1].mul(&minor(&e[1][0], &e[1][2], &e[2][0], &e[2][2])))
        .add(&e[0][2].mul(&minor(&e[1][0], &e[1][1], &e[2][0], &e[2][1])));
    CubicForm3 { poly: det }
}

/// True iff q = scale * p for some nonzero rational scale.
pub fn proportional(p: &Poly3, q: &Poly3) -> bool {
    if p.is_zero() || q.is_zero() {
        return p.is_zero() == q.is_zero();
    }
    let (_, a) = primitive_part(p);
    let (_, b) = primitive_part(q);
    a == b
}

fn net_of(text: &str) -> Net {
    parse_net(text).expect("catalogue net must parse")
}

fn cubic_of(text: &str) -> Poly3 {
    // Printed discriminants use variables (x, y, z) = (lambda, mu, nu).
    crate::poly::parse_poly(text).expect("catalogue discriminant must parse")
}

/// One row variant of the normal-form catalogue: the label, the exact net
/// and the discriminant printed next to it (in (lambda, mu, nu) as (x, y, z)).
pub struct CatalogueRow {
    pub name: &'static str,
    /// Label of the other sign variant in the same printed row, if any.
    pub partner: Option<&'static str>,
    pub net: Net,
    pub printed_discriminant: Poly3,
}

/// The fifteen-row catalogue of non-family normal forms, one entry per
/// sign variant (19 labels).
pub fn catalogue() -> Vec<CatalogueRow> {
    let row = |name, partner, net, disc| CatalogueRow {
        name,
        partner,
        net: net_of(net),
        printed_discriminant: cubic_of(disc),
    };
    vec![
        row("D_a", None, "(x^2, y^2, z^2 + 2*x*y)", "z*(x*y - z^2)"),
        row("D_b", Some("D_c"), "(x^2 - y^2, 2*x*y, x^2 + z^2)", "z*(x^2 + x*z + y^2)"),
        row("D_c", Some("D_b"), "(x^2 - y^2, 2*x*y, x^2 - z^2)", "z*(x^2 + x*z + y^2)"),
        row("D_a*", None, "(2*x*z, 2*y*z, z^2 + 2*x*y)", "z*(2*x*y - z^2)"),
        row("D_b*", Some("D_c*"), "(2*x*z, 2*y*z, x^2 + y^2 - z^2)", "z*(x^2 + y^2 + z^2)"),
        row("D_c*", Some("D_b*"), "(2*x*z, 2*y*z, x^2 + y^2 + z^2)", "z*(x^2 + y^2 - z^2)"),
        row("E_a", Some("E_b"), "(x^2 + y^2, 2*x*y, z^2)", "z*(x^2 - y^2)"),
        row("E_b", Some("E_a"), "(x^2 - y^2, 2*x*y, z^2)", "z*(x^2 + y^2)"),
        row("E_a*", Some("E_b*"), "(x^2 - y^2, 2*x*z, 2*y*z)", "x*(y^2 + z^2)"),
        row("E_b*", Some("E_a*"), "(x^2 + y^2, 2*x*z, 2*y*z)", "x*(y^2 - z^2)"),
        row("F_a", Some("F_b"), "(x^2 + y^2, 2*x*y, 2*y*z)", "x*z^2"),
        row("F_b", Some("F_a"), "(x^2 - y^2, 2*x*y, 2*y*z)", "x*z^2"),
        row("F_a*", Some("F_b*"), "(x^2 - y^2, 2*x*z, z^2)", "x*(x*z - y^2)"),
        row("F_b*", Some("F_a*"), "(x^2 + y^2, 2*x*z, z^2)", "x*(x*z - y^2)"),
        row("G", None, "(x^2, y^2, 2*y*z)", "x*z^2"),
        row("G*", None, "(2*x*y, 2*x*z, z^2)", "x^2*z"),
        row("H", None, "(x^2, 2*x*y, y^2 + 2*x*z)", "z^3"),
        row("I", None, "(x^2, 2*x*y, y^2)", "0"),
        row("I*", None, "(2*x*z, 2*y*z, z^2)", "0"),
    ]
}

pub fn table3_net(name: &str) -> Result<Net, NetError> {
    catalogue()
        .into_iter()
        .find(|r| r.name == name)
        .map(|r| r.net)
        .ok_or_else(|| NetError::UnknownLabel(name.to_string()))
}

/// Result of comparing a catalogue row's exact pencil determinant with its
/// printed discriminant (up to nonzero rational scalar, allowing the row's
/// sign-variant pairing to be swapped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowMatch {
    Direct,
    /// Matched the discriminant printed next to the partner sign variant.
    PartnerSwap,
    Mismatch,
}

pub fn audit_catalogue_row(row: &CatalogueRow, all: &[CatalogueRow]) -> RowMatch {
    let det = discriminant_cubic(&row.net).poly;
    if proportional(&det, &row.printed_discriminant) {
        return RowMatch::Direct;
    }
    if let Some(partner) = row.partner {
        if let Some(p) = all.iter().find(|r| r.name == partner) {
            if proportional(&det, &p.printed_discriminant) {
                return RowMatch::PartnerSwap;
            }
        }
    }
    RowMatch::Mismatch
}

/// The first generic family:
/// lambda(2xz + y^2) + mu(2yz) + nu(-x^2 - 2g y^2 + c z^2 + 2g xz),
/// valid when c(c + 9g^2) != 0.
pub fn family3_net(c: &Rat, g: &Rat) -> (Net, bool) {
    let x2 = [2u32, 0, 0];
    let y2 = [0, 2, 0];
    let z2 = [0, 0, 2];
    let xz = [1, 0, 1];
    let yz = [0, 1, 1];
    let mut q1 = Poly3::zero();
    q1.add_term(xz, rat(2));
    q1.add_term(y2, rat(1));
    let mut q2 = Poly3::zero();
    q2.add_term(yz, rat(2));
    let mut q3 = Poly3::zero();
    q3.add_term(x2, rat(-1));
    q3.add_term(y2, rat(-2) * g);
    q3.add_term(z2, c.clone());
    q3.add_term(xz, rat(2) * g);
    let net = Net::from_polys(&[q1, q2, q3]).unwrap();
    let valid = !(c * (c + rat(9) * g * g)).is_zero();
    (net, valid)
}

/// The Hessian family: lambda(x^2 + 2c yz) + mu(y^2 + 2c xz) + nu(z^2 + 2c xy),
/// valid when c(c^3 - 1)(8c^3 + 1) != 0.
pub fn family4_net(c: &Rat) -> (Net, bool) {
    let mk = |sq: [u32; 3], mixed: [u32; 3]| {
        let mut p = Poly3::zero();
        p.add_term(sq, rat(1));
        p.add_term(mixed, rat(2) * c);
        p
    };
    let net = Net::from_polys(&[
        mk([2, 0, 0], [0, 1, 1]),
        mk([0, 2, 0], [1, 0, 1]),
        mk([0, 0, 2], [1, 1, 0]),
    ])
    .unwrap();
    let c3 = c * c * c;
    let valid = !(c * (&c3 - rat(1)) * (rat(8) * &c3 + rat(1))).is_zero();
    (net, valid)
}

/// Region of the (c, g) parameter plane for the first family, following
/// the five inequality regions with g-sign subcases; the specific sublabel
/// is a best-effort annotation on top of the unambiguous region predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table2Label {
    pub region: &'static str,
    pub g_positive: Option<bool>,
    pub label: &'static str,
}

pub fn table2_label(c: &Rat, g: &Rat) -> Table2Label {
    let g_sign = if g.is_zero() { None } else { Some(g.is_positive()) };
    let boundary = rat(-9) * g * g;
    if c.is_zero() && g.is_zero() {
        return Table2Label {
            region: "c = g = 0",
            g_positive: None,
            label: "C",
        };
    }
    if *c < boundary {
        Table2Label {
            region: "c < -9g^2",
            g_positive: g_sign,
            label: "A_b",
        }
    } else if *c == boundary {
        Table2Label {
            region: "c = -9g^2",
            g_positive: g_sign,
            label: if g.is_positive() { "B_c" } else { "B_a" },
        }
    } else if c.is_negative() {
        Table2Label {
            region: "-9g^2 < c < 0",
            g_positive: g_sign,
            label: if g.is_positive() { "A_c" } else { "A_a" },
        }
    } else if c.is_zero() {
        Table2Label {
            region: "c = 0",
            g_positive: g_sign,
            label: if g.is_positive() { "B_a*" } else { "B_c*" },
        }
    } else {
        Table2Label {
            region: "c > 0",
            g_positive: g_sign,
            label: "A_d",
        }
    }
}

/// GL(3) x GL(3) action: source substitution by S (rows give the old
/// variables in terms of the new ones, matching polynomial substitution)
/// and target mixing by T: output form i is sum_j T[i][j] (q_j o S),
/// i.e. matrix sum_j T[i][j] S^T A_j S.
pub fn apply_gl_pair(n: &Net, s: &RatMat, t: &RatMat) -> Result<Net, NetError> {
    if s.det().is_zero() || t.det().is_zero() {
        return Err(NetError::SingularMatrix);
    }
    let st = s.transpose();
    let conj: Vec<RatMat> = n.q.iter().map(|f| st.matmul(&f.to_ratmat()).matmul(s)).collect();
    let mut out = Net {
        q: std::array::from_fn(|_| QuadraticForm3::zero()),
    };
    for i in 0..3 {
        for j in 0..3 {
            let w = &t[(i, j)];
            if w.is_zero() {
                continue;
            }
            for r in 0..3 {
                for cidx in 0..3 {
                    out.q[i].m[r][cidx] += w * &conj[j][(r, cidx)];
                }
            }
        }
    }
    Ok(out)
}

/// The regular Monge-form germ (x, y, z, q1, q2, q3) whose second
/// fundamental form at the origin is the net.
pub fn net_to_monge(n: &Net) -> RegularGerm {
    RegularGerm {
        comps: [
            Poly3::var(0),
            Poly3::var(1),
            Poly3::var(2),
            n.q[0].to_poly(),
            n.q[1].to_poly(),
            n.q[2].to_poly(),
        ],
    }
}

// ---------------------------------------------------------------------------
// Exact arithmetic in Q(sqrt 2), needed because the last equivalence step of
// the worked example genuinely requires sqrt 2 (the target net has rational
// rank-one elements while the source net does not).

#[derive(Debug, Clone, PartialEq, Eq)]
struct Sqrt2Ext {
    a: Rat,
    b: Rat,
}

impl Sqrt2Ext {
    fn rational(a: Rat) -> Self {
        Sqrt2Ext { a, b: Rat::zero() }
    }
    fn sqrt2_times(b: Rat) -> Self {
        Sqrt2Ext { a: Rat::zero(), b }
    }
    fn zero() -> Self {
        Sqrt2Ext::rational(Rat::zero())
    }
    fn add(&self, o: &Self) -> Self {
        Sqrt2Ext {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Sqrt2Ext {
            a: &self.a * &o.a + rat(2) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

type ExtMat = [[Sqrt2Ext; 3]; 3];

fn ext_from_rat(m: &RatMat) -> ExtMat {
    std::array::from_fn(|i| std::array::from_fn(|j| Sqrt2Ext::rational(m[(i, j)].clone())))
}

fn ext_matmul(a: &ExtMat, b: &ExtMat) -> ExtMat {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = Sqrt2Ext::zero();
            for k in 0..3 {
                acc = acc.add(&a[i][k].mul(&b[k][j]));
            }
            acc
        })
    })
}

fn ext_transpose(a: &ExtMat) -> ExtMat {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

/// Invariant summary of one curvature locus used to compare the two
/// manifolds of the worked example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocusSummary {
    pub point_type: usize,
    pub hull_dim: usize,
    pub vanishing_dim_deg2: usize,
    pub vanishing_dim_deg4: usize,
}

fn locus_summary(g: &RegularGerm) -> LocusSummary {
    let m = g.second_form_matrix();
    let coeffs = regular_locus_coefficients(g);
    let mut pts = Vec::new();
    for s in -3..=3 {
        for t in -3..=3 {
            let [u, v, w] = rational_sphere_point(&rat(s), &rat(t));
            pts.push(eval_regular_locus_exact(&coeffs, &u, &v, &w));
        }
    }
    LocusSummary {
        point_type: point_type(&m).dim,
        hull_dim: affine_hull_of_locus(&m, Domain::Sphere).dim,
        vanishing_dim_deg2: fit_vanishing_forms(&pts, 2).unwrap().len(),
        vanishing_dim_deg4: fit_vanishing_forms(&pts, 4).unwrap().len(),
    }
}

#[derive(Debug, Clone)]
pub struct Example44Report {
    pub start_net: Net,
    /// (x^2 + z^2, z(z - y), z(x + y)).
    pub step1_net: Net,
    pub step1_ok: bool,
    /// (y^2 + 2z^2, xz, yz).
    pub step2_net: Net,
    pub step2_ok: bool,
    /// Exact Q(sqrt 2) equivalence of step2_net with the catalogue F_a net.
    pub step3_ok: bool,
    pub first_manifold: LocusSummary,
    pub second_manifold: LocusSummary,
    /// True iff the invariant summaries differ, so the two G-equivalent
    /// nets have distinguishable curvature loci.
    pub loci_distinguished: bool,
}

/// Verify the worked equivalence chain
/// (x^2+yz, z^2-yz, xz+yz) ~ (x^2+z^2, z(z-y), z(x+y)) ~ (y^2+2z^2, xz, yz) ~ F_a
/// and compare the curvature-locus invariants of the first and last
/// Monge manifolds.
pub fn verify_example44() -> Example44Report {
    let start = net_of("(x^2 + y*z, z^2 - y*z, x*z + y*z)");

    // Step 1: add the second form to the first; source unchanged.
    let t1 = RatMat::from_i64(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
    let s1 = RatMat::identity(3);
    let step1 = apply_gl_pair(&start, &s1, &t1).unwrap();
    let step1_expect = net_of("(x^2 + z^2, z^2 - y*z, x*z + y*z)");
    let step1_ok = step1 == step1_expect;

    // Step 2: source substitution x -> y - z, y -> z - x, z -> z (the
    // stated change of coordinates, inverted), then a target mix.
    let s2 = RatMat::from_i64(&[&[0, 1, -1], &[-1, 0, 1], &[0, 0, 1]]);
    let t2 = RatMat::from_i64(&[&[1, 2, 2], &[0, 1, 0], &[0, 1, 1]]);
    let step2 = apply_gl_pair(&step1, &s2, &t2).unwrap();
    let step2_expect = net_of("(y^2 + 2*z^2, x*z, y*z)");
    let step2_ok = step2 == step2_expect;

    // Step 3: (y^2 + 2z^2, xz, yz) ~ F_a = (x^2 + y^2, 2xy, 2yz) needs
    // sqrt 2: source (x, y, z) -> (Z, X, (sqrt2/2) Y), target
    // diag-mix (q1, 2*sqrt2*q3, 2*sqrt2*q2). Verified exactly in Q(sqrt2).
    let z = || Sqrt2Ext::zero();
    let one = || Sqrt2Ext::rational(rat(1));
    let s3: ExtMat = [
        [z(), z(), one()],
        [one(), z(), z()],
        [z(), Sqrt2Ext::sqrt2_times(ratq(1, 2)), z()],
    ];
    let t3: [[Sqrt2Ext; 3]; 3] = [
        [one(), z(), z()],
        [z(), z(), Sqrt2Ext::sqrt2_times(rat(2))],
        [z(), Sqrt2Ext::sqrt2_times(rat(2)), z()],
    ];
    let fa = table3_net("F_a").unwrap();
    let s3t = ext_transpose(&s3);
    let conj: Vec<ExtMat> = step2_expect
        .q
        .iter()
        .map(|f| ext_matmul(&ext_matmul(&s3t, &ext_from_rat(&f.to_ratmat())), &s3))
        .collect();
    let mut step3_ok = true;
    for i in 0..3 {
        let mut acc: ExtMat = std::array::from_fn(|_| std::array::from_fn(|_| Sqrt2Ext::zero()));
        for j in 0..3 {
            for r in 0..3 {
                for c in 0..3 {
                    acc[r][c] = acc[r][c].add(&t3[i][j].mul(&conj[j][r][c]));
                }
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                if acc[r][c] != Sqrt2Ext::rational(fa.q[i].m[r][c].clone()) {
                    step3_ok = false;
                }
            }
        }
    }

    let first_manifold = locus_summary(&net_to_monge(&start));
    let second_manifold = locus_summary(&net_to_monge(&fa));
    let loci_distinguished = first_manifold != second_manifold;
    Example44Report {
        start_net: start,
        step1_net: step1,
        step1_ok,
        step2_net: step2,
        step2_ok,
        step3_ok,
        first_manifold,
        second_manifold,
        loci_distinguished,
    }
}
