//! Brute-force ground-state oracle, independent of every closed form in the
//! other modules. The ground state is built twice, by expanding its defining
//! polynomial and by contracting site matrices, and observables are taken as
//! literal vector contractions so that transfer-matrix results can be checked
//! against something that never saw a transfer matrix.
//!
//! Dense state vectors are indexed in base 2S+1 with site 0 as the most
//! significant digit and digit m + S at each site. Everything here is
//! exponential in L on purpose; budgets cap the blow-up.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::correlator::norm_sq_finite;
use crate::matrix::{dot, DMat};
use crate::qarith::{q_binomial, q_cgc, q_factorial, q_integer, Deformation, SpinLabel};
use crate::transfer::{h_coefficients, site_projector, site_spin_minus, site_spin_z};
use crate::Error;

/// Hard cap on dense state vectors: 3^12 amplitudes.
pub const MAX_DENSE_AMPLITUDES: usize = 531_441;

/// Hard cap on the dense Hamiltonian dimension.
pub const MAX_DENSE_HAMILTONIAN: usize = 729;

fn check_spin(spin: i64) -> Result<(), Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    Ok(())
}

fn check_len(len: i64) -> Result<(), Error> {
    if len < 2 {
        return Err(Error::OutOfRange("chain length (L >= 2)"));
    }
    Ok(())
}

fn dense_dim(spin: i64, len: i64, budget: usize) -> Result<usize, Error> {
    let b = (2 * spin + 1) as usize;
    if len > 64 {
        return Err(Error::OverBudget {
            needed: usize::MAX,
            budget,
        });
    }
    let needed = b.saturating_pow(len as u32);
    if needed > budget {
        return Err(Error::OverBudget { needed, budget });
    }
    Ok(needed)
}

fn stride(b: usize, len: i64, site: i64) -> usize {
    b.pow((len - 1 - site) as u32)
}

/// Polynomial in the site variables x_k, y_k, keyed by the exponent list
/// [x_0, y_0, x_1, y_1, ...].
#[derive(Debug, Clone)]
pub struct ChainPoly {
    len: i64,
    terms: BTreeMap<Vec<u8>, f64>,
}

impl ChainPoly {
    fn constant(len: i64) -> ChainPoly {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; 2 * len as usize], 1.0);
        ChainPoly { len, terms }
    }

    pub fn sites(&self) -> i64 {
        self.len
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.terms
    }

    /// Multiplies by (q^m x_k y_kp - q^{-m} y_k x_kp).
    fn bond_factor(&self, q: Deformation, m: i64, k: usize, kp: usize) -> ChainPoly {
        let cp = q.powi(m);
        let cm = q.powi(-m);
        let mut terms: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (key, &c) in &self.terms {
            let mut up = key.clone();
            up[2 * k] += 1;
            up[2 * kp + 1] += 1;
            *terms.entry(up).or_insert(0.0) += c * cp;
            let mut down = key.clone();
            down[2 * k + 1] += 1;
            down[2 * kp] += 1;
            *terms.entry(down).or_insert(0.0) -= c * cm;
        }
        ChainPoly {
            len: self.len,
            terms,
        }
    }
}

/// prod_{k in Z_L} prod_{m=1}^{S} (q^m x_k y_{k+1} - q^{-m} y_k x_{k+1}),
/// the ground-state generating polynomial on the ring of L sites.
pub fn build_vbs_poly(spin: i64, q: Deformation, len: i64) -> Result<ChainPoly, Error> {
    check_spin(spin)?;
    check_len(len)?;
    dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    let mut p = ChainPoly::constant(len);
    for k in 0..len as usize {
        let kp = (k + 1) % len as usize;
        for m in 1..=spin {
            p = p.bond_factor(q, m, k, kp);
        }
    }
    Ok(p)
}

/// Dense amplitudes of a spin chain state.
#[derive(Debug, Clone)]
pub struct SpinState {
    spin: i64,
    len: i64,
    amp: Vec<f64>,
}

impl SpinState {
    pub fn spin(&self) -> i64 {
        self.spin
    }

    pub fn len(&self) -> i64 {
        self.len
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amp
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.amp, &self.amp)
    }
}

/// Reads a homogeneous degree-2S polynomial as a spin state: the monomial
/// with exponents (S+m_k, S-m_k) contributes its coefficient times
/// prod_k sqrt([S+m_k]! [S-m_k]!) to the configuration {m_k}.
pub fn poly_to_spin_state(poly: &ChainPoly, spin: i64, q: Deformation) -> Result<SpinState, Error> {
    check_spin(spin)?;
    let len = poly.len;
    check_len(len)?;
    let dim = dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    let b = (2 * spin + 1) as usize;
    let mut amp = vec![0.0; dim];
    for (key, &c) in poly.terms() {
        let mut idx = 0usize;
        let mut weight = 1.0;
        for site in 0..len as usize {
            let ax = key[2 * site] as i64;
            let ay = key[2 * site + 1] as i64;
            if ax + ay != 2 * spin {
                return Err(Error::OutOfRange("site degree (expected 2S everywhere)"));
            }
            idx = idx * b + ax as usize;
            weight *= libm::sqrt(q_factorial(ax, q) * q_factorial(ay, q));
        }
        amp[idx] += c * weight;
    }
    Ok(SpinState { spin, len, amp })
}

/// The same state from the matrix-product side: psi[m_1..m_L] =
/// Tr(M_{m_1} ... M_{m_L}) with (M_m)_{i,i'} = h_{i,i'} delta_{m, i'-i}.
/// Shares partial products along the digit tree, so the cost is a small
/// multiple of (2S+1)^L.
pub fn mps_state(spin: i64, q: Deformation, len: i64) -> Result<SpinState, Error> {
    check_spin(spin)?;
    check_len(len)?;
    let dim = dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    let b = (2 * spin + 1) as usize;
    let n = (spin + 1) as usize;
    let h = h_coefficients(spin, q)?;
    let mut mats = Vec::with_capacity(b);
    for d in 0..b {
        let m = d as i64 - spin;
        mats.push(DMat::from_fn(n, n, |i, ip| {
            if ip as i64 - i as i64 == m {
                h.entry(i, ip)
            } else {
                0.0
            }
        }));
    }
    let mut amp = vec![0.0; dim];
    fn rec(mats: &[DMat], b: usize, len: usize, depth: usize, idx: usize, acc: &DMat, amp: &mut [f64]) {
        if depth == len {
            amp[idx] = acc.trace();
            return;
        }
        for d in 0..b {
            let next = acc.mul(&mats[d]);
            rec(mats, b, len, depth + 1, idx * b + d, &next, amp);
        }
    }
    rec(&mats, b, len as usize, 0, 0, &DMat::identity(n), &mut amp);
    Ok(SpinState { spin, len, amp })
}

/// Two-site projector onto total spin J, as a (2S+1)^2 matrix over the pair
/// basis (m_1 + S)(2S+1) + (m_2 + S):
/// pi_J = sum_m |J,m><J,m| with |J,m> = sum CG(m_1,m_2) |m_1,m_2>.
pub fn projector(spin: i64, j_tot: i64, q: Deformation) -> Result<DMat, Error> {
    check_spin(spin)?;
    if j_tot < 0 || j_tot > 2 * spin {
        return Err(Error::OutOfRange("total spin (0 <= J <= 2S)"));
    }
    let b = (2 * spin + 1) as usize;
    let dim = b * b;
    let mut mat = DMat::zeros(dim, dim);
    for m in -j_tot..=j_tot {
        let target = SpinLabel::integer(j_tot, m)?;
        let mut cvec = vec![0.0; dim];
        for m1 in -spin..=spin {
            let m2 = m - m1;
            if m2.abs() > spin {
                continue;
            }
            let s1 = SpinLabel::integer(spin, m1)?;
            let s2 = SpinLabel::integer(spin, m2)?;
            let idx = (m1 + spin) as usize * b + (m2 + spin) as usize;
            cvec[idx] = q_cgc(s1, s2, target, q)?;
        }
        for (r, &cr) in cvec.iter().enumerate() {
            if cr == 0.0 {
                continue;
            }
            for (c, &cc) in cvec.iter().enumerate() {
                *mat.at_mut(r, c) += cr * cc;
            }
        }
    }
    Ok(mat)
}

/// Bond and multiplet dependent positive couplings C_J(k, k+1), default one.
#[derive(Debug, Clone)]
pub struct Couplings {
    default: f64,
    overrides: BTreeMap<(i64, i64), f64>,
}

impl Couplings {
    pub fn uniform() -> Couplings {
        Couplings {
            default: 1.0,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_default(c: f64) -> Result<Couplings, Error> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NonPositiveCoupling { value: c });
        }
        Ok(Couplings {
            default: c,
            overrides: BTreeMap::new(),
        })
    }

    pub fn set(&mut self, j_tot: i64, bond: i64, c: f64) -> Result<(), Error> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NonPositiveCoupling { value: c });
        }
        self.overrides.insert((j_tot, bond), c);
        Ok(())
    }

    pub fn get(&self, j_tot: i64, bond: i64) -> f64 {
        *self.overrides.get(&(j_tot, bond)).unwrap_or(&self.default)
    }
}

/// out = (A at `site`) v for a one-site operator A over the 2S+1 basis.
pub fn apply_one_site(
    spin: i64,
    len: i64,
    site: i64,
    op: &DMat,
    v: &[f64],
) -> Result<Vec<f64>, Error> {
    check_spin(spin)?;
    check_len(len)?;
    if site < 0 || site >= len {
        return Err(Error::OutOfRange("site index"));
    }
    let dim = dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    let b = (2 * spin + 1) as usize;
    if op.nrows() != b || op.ncols() != b || v.len() != dim {
        return Err(Error::OutOfRange("operator or state dimension"));
    }
    let s = stride(b, len, site);
    let mut out = vec![0.0; dim];
    for (n, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let d = (n / s) % b;
        let base = n - d * s;
        for e in 0..b {
            let w = op.at(e, d);
            if w != 0.0 {
                out[base + e * s] += w * x;
            }
        }
    }
    Ok(out)
}

/// out = (A on sites bond, bond+1 mod L) v for a two-site operator over the
/// pair basis used by [`projector`].
pub fn apply_two_site(
    spin: i64,
    len: i64,
    bond: i64,
    op: &DMat,
    v: &[f64],
) -> Result<Vec<f64>, Error> {
    check_spin(spin)?;
    check_len(len)?;
    if bond < 0 || bond >= len {
        return Err(Error::OutOfRange("bond index"));
    }
    let dim = dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    let b = (2 * spin + 1) as usize;
    if op.nrows() != b * b || op.ncols() != b * b || v.len() != dim {
        return Err(Error::OutOfRange("operator or state dimension"));
    }
    let s1 = stride(b, len, bond);
    let s2 = stride(b, len, (bond + 1) % len);
    let mut out = vec![0.0; dim];
    for (n, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let d1 = (n / s1) % b;
        let d2 = (n / s2) % b;
        let col = d1 * b + d2;
        let base = n - d1 * s1 - d2 * s2;
        for e1 in 0..b {
            for e2 in 0..b {
                let w = op.at(e1 * b + e2, col);
                if w != 0.0 {
                    out[base + e1 * s1 + e2 * s2] += w * x;
                }
            }
        }
    }
    Ok(out)
}

/// out = H v with H = sum_{k in Z_L} sum_{J=S+1}^{2S} C_J(k, k+1) pi_J^(k).
pub fn apply_hamiltonian(
    spin: i64,
    q: Deformation,
    len: i64,
    couplings: &Couplings,
    v: &[f64],
) -> Result<Vec<f64>, Error> {
    check_spin(spin)?;
    check_len(len)?;
    let dim = dense_dim(spin, len, MAX_DENSE_AMPLITUDES)?;
    if v.len() != dim {
        return Err(Error::OutOfRange("state dimension"));
    }
    let mut out = vec![0.0; dim];
    for j_tot in (spin + 1)..=(2 * spin) {
        let p = projector(spin, j_tot, q)?;
        for bond in 0..len {
            let c = couplings.get(j_tot, bond);
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonPositiveCoupling { value: c });
            }
            let piece = apply_two_site(spin, len, bond, &p, v)?;
            for (o, x) in out.iter_mut().zip(piece.iter()) {
                *o += c * x;
            }
        }
    }
    Ok(out)
}

/// Dense H over the full (2S+1)^L space; capped at dimension 729.
pub fn hamiltonian_matrix(
    spin: i64,
    q: Deformation,
    len: i64,
    couplings: &Couplings,
) -> Result<DMat, Error> {
    check_spin(spin)?;
    check_len(len)?;
    let dim = dense_dim(spin, len, MAX_DENSE_HAMILTONIAN)?;
    let b = (2 * spin + 1) as usize;
    let mut hmat = DMat::zeros(dim, dim);
    for j_tot in (spin + 1)..=(2 * spin) {
        let p = projector(spin, j_tot, q)?;
        for bond in 0..len {
            let c = couplings.get(j_tot, bond);
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonPositiveCoupling { value: c });
            }
            let s1 = stride(b, len, bond);
            let s2 = stride(b, len, (bond + 1) % len);
            for n in 0..dim {
                let d1 = (n / s1) % b;
                let d2 = (n / s2) % b;
                let col = d1 * b + d2;
                let base = n - d1 * s1 - d2 * s2;
                for e1 in 0..b {
                    for e2 in 0..b {
                        let w = p.at(e1 * b + e2, col);
                        if w != 0.0 {
                            *hmat.at_mut(base + e1 * s1 + e2 * s2, n) += c * w;
                        }
                    }
                }
            }
        }
    }
    Ok(hmat)
}

/// Observables the oracle can evaluate on the normalised ground state.
/// Site labels are 1-based to match the transfer-matrix conventions, so a
/// pair observable acts on sites 1 and r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleObservable {
    Sz,
    SzSquared,
    Projector { m: i64 },
    Zz { r: i64 },
    Pm { r: i64 },
}

/// <Psi|O|Psi> / <Psi|Psi> by direct contraction of the dense ground state.
pub fn oracle_correlator(
    spin: i64,
    q: Deformation,
    len: i64,
    obs: OracleObservable,
) -> Result<f64, Error> {
    let psi = mps_state(spin, q, len)?;
    let nsq = psi.norm_sq();
    let value = match obs {
        OracleObservable::Sz => {
            let z = site_spin_z(spin)?;
            dot(psi.amplitudes(), &apply_one_site(spin, len, 0, &z, psi.amplitudes())?)
        }
        OracleObservable::SzSquared => {
            let z = site_spin_z(spin)?;
            let zz = z.mul(&z);
            dot(psi.amplitudes(), &apply_one_site(spin, len, 0, &zz, psi.amplitudes())?)
        }
        OracleObservable::Projector { m } => {
            let p = site_projector(spin, m)?;
            dot(psi.amplitudes(), &apply_one_site(spin, len, 0, &p, psi.amplitudes())?)
        }
        OracleObservable::Zz { r } => {
            if r < 2 || r > len {
                return Err(Error::OutOfRange("separation (2 <= r <= L)"));
            }
            let z = site_spin_z(spin)?;
            let left = apply_one_site(spin, len, 0, &z, psi.amplitudes())?;
            let right = apply_one_site(spin, len, r - 1, &z, psi.amplitudes())?;
            dot(&left, &right)
        }
        OracleObservable::Pm { r } => {
            if r < 2 || r > len {
                return Err(Error::OutOfRange("separation (2 <= r <= L)"));
            }
            // <S^+_1 S^-_r> = (S^-_1 psi) . (S^-_r psi) since (S^+)^T = S^-
            let sm = site_spin_minus(spin)?;
            let left = apply_one_site(spin, len, 0, &sm, psi.amplitudes())?;
            let right = apply_one_site(spin, len, r - 1, &sm, psi.amplitudes())?;
            dot(&left, &right)
        }
    };
    Ok(value / nsq)
}

/// Agreement between the two state constructions and the transfer-matrix
/// norm, all as relative gaps.
#[derive(Debug, Clone, Copy)]
pub struct RouteComparison {
    /// max |psi_poly - psi_mps| over max |psi_poly|; the two routes agree
    /// amplitude by amplitude with overall scale one, not just up to phase.
    pub state_diff: f64,
    pub poly_vs_transfer: f64,
    pub mps_vs_transfer: f64,
}

pub fn compare_routes(spin: i64, q: Deformation, len: i64) -> Result<RouteComparison, Error> {
    let from_poly = poly_to_spin_state(&build_vbs_poly(spin, q, len)?, spin, q)?;
    let from_mps = mps_state(spin, q, len)?;
    let mut scale = 0.0f64;
    let mut gap = 0.0f64;
    for (a, b) in from_poly.amplitudes().iter().zip(from_mps.amplitudes()) {
        scale = scale.max(a.abs());
        gap = gap.max((a - b).abs());
    }
    let trg = norm_sq_finite(spin, q, len)?.value();
    Ok(RouteComparison {
        state_diff: gap / scale,
        poly_vs_transfer: (from_poly.norm_sq() - trg).abs() / trg,
        mps_vs_transfer: (from_mps.norm_sq() - trg).abs() / trg,
    })
}

// Two-variable-pair polynomials over (x_a, y_a, x_b, y_b), used to iterate
// the coproduct lowering operator against its closed form.

type Key4 = [u8; 4];

#[derive(Debug, Clone, Default)]
struct TwoSitePoly {
    terms: BTreeMap<Key4, f64>,
}

impl TwoSitePoly {
    fn constant() -> TwoSitePoly {
        let mut terms = BTreeMap::new();
        terms.insert([0, 0, 0, 0], 1.0);
        TwoSitePoly { terms }
    }

    fn add_term(&mut self, key: Key4, c: f64) {
        *self.terms.entry(key).or_insert(0.0) += c;
    }

    fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn diff_max(&self, other: &TwoSitePoly) -> f64 {
        let mut gap = 0.0f64;
        for (k, &c) in &self.terms {
            gap = gap.max((c - other.terms.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, &c) in &other.terms {
            if !self.terms.contains_key(k) {
                gap = gap.max(c.abs());
            }
        }
        gap
    }

    /// Multiplies by (x_a y_b - w x_b y_a).
    fn mul_cross_factor(&self, w: f64) -> TwoSitePoly {
        let mut out = TwoSitePoly::default();
        for (&[ax, ay, bx, by], &c) in &self.terms {
            out.add_term([ax + 1, ay, bx, by + 1], c);
            out.add_term([ax, ay + 1, bx + 1, by], -c * w);
        }
        out
    }

    fn mul_monomial(&self, add: Key4, scalar: f64) -> TwoSitePoly {
        let mut out = TwoSitePoly::default();
        for (&[ax, ay, bx, by], &c) in &self.terms {
            out.add_term(
                [ax + add[0], ay + add[1], bx + add[2], by + add[3]],
                c * scalar,
            );
        }
        out
    }

    fn accumulate(&mut self, other: TwoSitePoly) {
        for (k, c) in other.terms {
            self.add_term(k, c);
        }
    }
}

/// v_J = (x_a x_b)^J prod_{nu=1}^{2S-J} (x_a y_b - q^{2(nu-S-1)} x_b y_a).
fn highest_weight_vector(spin: i64, j_tot: i64, q: Deformation) -> TwoSitePoly {
    let j = j_tot as u8;
    let mut p = TwoSitePoly::constant().mul_monomial([j, 0, j, 0], 1.0);
    for nu in 1..=(2 * spin - j_tot) {
        p = p.mul_cross_factor(q.powi(2 * (nu - spin - 1)));
    }
    p
}

/// One application of the coproduct lowering operator. The four dilation
/// terms are grouped into two q-bracket pairs, which removes the 1/(q - 1/q)
/// prefactor and stays finite at q = 1:
/// the x_a -> y_a move carries [x_a-degree] q^{(bx-by)/2}, the x_b -> y_b
/// move carries q^{(ay-ax)/2} [x_b-degree].
fn apply_lowering(p: &TwoSitePoly, q: Deformation) -> TwoSitePoly {
    let mut out = TwoSitePoly::default();
    for (&[ax, ay, bx, by], &c) in &p.terms {
        if ax >= 1 {
            out.add_term(
                [ax - 1, ay + 1, bx, by],
                c * q_integer(ax as i64, q) * q.pow_half(bx as i64 - by as i64),
            );
        }
        if bx >= 1 {
            out.add_term(
                [ax, ay, bx - 1, by + 1],
                c * q.pow_half(ay as i64 - ax as i64) * q_integer(bx as i64, q),
            );
        }
    }
    out
}

/// Closed form of the n-fold lowering of v_J:
/// q^{nS} [n]! sum_mu q^{-2 mu S} qbin(J,mu) qbin(J,n-mu)
///   x_a^{J-n+mu} y_a^{n-mu} x_b^{J-mu} y_b^{mu} prod_{nu} (...),
/// with mu confined to max(0, n-J)..min(n, J) so no negative exponent is
/// ever formed; the range is empty from n = 2J+1 on.
fn closed_lowered(spin: i64, j_tot: i64, n: i64, q: Deformation) -> TwoSitePoly {
    let mut base = TwoSitePoly::constant();
    for nu in 1..=(2 * spin - j_tot) {
        base = base.mul_cross_factor(q.powi(2 * (nu - spin - 1)));
    }
    let mut out = TwoSitePoly::default();
    let lead = q.powi(n * spin) * q_factorial(n, q);
    let mu_lo = 0.max(n - j_tot);
    let mu_hi = n.min(j_tot);
    let mut mu = mu_lo;
    while mu <= mu_hi {
        let scalar = lead
            * q.powi(-2 * mu * spin)
            * q_binomial(j_tot, mu, q)
            * q_binomial(j_tot, n - mu, q);
        let mono = [
            (j_tot - n + mu) as u8,
            (n - mu) as u8,
            (j_tot - mu) as u8,
            mu as u8,
        ];
        out.accumulate(base.mul_monomial(mono, scalar));
        mu += 1;
    }
    out
}

/// Outcome of checking the n-fold lowering of v_J against its closed form.
#[derive(Debug, Clone, Copy)]
pub struct Prop1Report {
    pub spin: i64,
    pub j_tot: i64,
    pub n: i64,
    /// Largest coefficient gap between the iterated lowering and the closed
    /// form, relative to the largest coefficient met anywhere on the way
    /// (inputs, iterates and both results).
    pub mismatch: f64,
}

pub fn verify_proposition1(
    spin: i64,
    j_tot: i64,
    n: i64,
    q: Deformation,
) -> Result<Prop1Report, Error> {
    check_spin(spin)?;
    if j_tot < 0 || j_tot > 2 * spin {
        return Err(Error::OutOfRange("total spin (0 <= J <= 2S)"));
    }
    if n < 0 {
        return Err(Error::OutOfRange("lowering count (n >= 0)"));
    }
    let mut cur = highest_weight_vector(spin, j_tot, q);
    let mut scale = cur.max_abs();
    for _ in 0..n {
        cur = apply_lowering(&cur, q);
        scale = scale.max(cur.max_abs());
    }
    let closed = closed_lowered(spin, j_tot, n, q);
    scale = scale.max(closed.max_abs()).max(1e-300);
    Ok(Prop1Report {
        spin,
        j_tot,
        n,
        mismatch: cur.diff_max(&closed) / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::{prob_sz, two_point_finite, PairOp};
    use crate::matrix::sym_eigenvalues;

    fn def(q: f64) -> Deformation {
        Deformation::new(q).unwrap()
    }

    /// Four-dilation-term form of the lowering operator; its 1/(q - 1/q)
    /// prefactor blows up at q = 1, so it only serves as a cross-check of
    /// the grouped form away from q = 1.
    fn apply_lowering_literal(p: &TwoSitePoly, q: Deformation) -> TwoSitePoly {
        let qv = q.q();
        let pref = 1.0 / (qv - 1.0 / qv);
        let mut out = TwoSitePoly::default();
        for (&[ax, ay, bx, by], &c) in &p.terms {
            if ax >= 1 {
                let key = [ax - 1, ay + 1, bx, by];
                out.add_term(
                    key,
                    c * q.powi(ax as i64) * q.pow_half(bx as i64) * q.pow_half(-(by as i64)) * pref,
                );
                out.add_term(
                    key,
                    -c * q.powi(-(ax as i64)) * q.pow_half(bx as i64 - by as i64) * pref,
                );
            }
            if bx >= 1 {
                let key = [ax, ay, bx - 1, by + 1];
                out.add_term(
                    key,
                    c * q.pow_half(ay as i64 - ax as i64) * q.powi(bx as i64) * pref,
                );
                out.add_term(
                    key,
                    -c * q.pow_half(ay as i64 - ax as i64) * q.powi(-(bx as i64)) * pref,
                );
            }
        }
        out
    }

    #[test]
    fn vbs_poly_is_homogeneous_with_q_free_support() {
        for spin in 1..=2 {
            for len in 2..=4 {
                let base = build_vbs_poly(spin, def(1.0), len).unwrap();
                for key in base.terms().keys() {
                    for site in 0..len as usize {
                        assert_eq!(
                            key[2 * site] as i64 + key[2 * site + 1] as i64,
                            2 * spin
                        );
                    }
                }
                for &qv in &[0.5, 2.0] {
                    let other = build_vbs_poly(spin, def(qv), len).unwrap();
                    let keys: Vec<_> = base.terms().keys().collect();
                    let other_keys: Vec<_> = other.terms().keys().collect();
                    assert_eq!(keys, other_keys);
                }
            }
        }
    }

    #[test]
    fn state_routes_agree_with_transfer_norm() {
        for spin in 1..=2 {
            for len in 2..=4 {
                for &qv in &[0.5, 1.0, 2.0] {
                    let cmp = compare_routes(spin, def(qv), len).unwrap();
                    assert!(cmp.state_diff <= 1e-12);
                    assert!(cmp.poly_vs_transfer <= 1e-12);
                    assert!(cmp.mps_vs_transfer <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn spin1_ring_norms() {
        let q = def(1.0);
        let two = mps_state(1, q, 2).unwrap();
        let three = mps_state(1, q, 3).unwrap();
        assert!((two.norm_sq() - 12.0).abs() < 1e-11);
        assert!((three.norm_sq() - 24.0).abs() < 1e-11);
    }

    #[test]
    fn projectors_resolve_the_identity() {
        for spin in 1..=2 {
            for &qv in &[0.5, 1.0, 2.0] {
                let q = def(qv);
                let dim = ((2 * spin + 1) * (2 * spin + 1)) as usize;
                let mut total = DMat::zeros(dim, dim);
                for j_tot in 0..=(2 * spin) {
                    let p = projector(spin, j_tot, q).unwrap();
                    assert!(p.mul(&p).sub(&p).max_abs() <= 1e-10);
                    assert!((p.trace() - (2 * j_tot + 1) as f64).abs() <= 1e-10);
                    for other in 0..j_tot {
                        let po = projector(spin, other, q).unwrap();
                        assert!(p.mul(&po).max_abs() <= 1e-10);
                    }
                    total = total.add(&p);
                }
                assert!(total.sub(&DMat::identity(dim)).max_abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn high_spin_projectors_annihilate_the_state() {
        for spin in 1..=2 {
            for len in 3..=4 {
                for &qv in &[0.5, 1.0, 2.0] {
                    let q = def(qv);
                    let psi = mps_state(spin, q, len).unwrap();
                    let norm = libm::sqrt(psi.norm_sq());
                    for j_tot in (spin + 1)..=(2 * spin) {
                        let p = projector(spin, j_tot, q).unwrap();
                        for bond in 0..len {
                            let hit =
                                apply_two_site(spin, len, bond, &p, psi.amplitudes()).unwrap();
                            assert!(libm::sqrt(dot(&hit, &hit)) <= 1e-10 * norm);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hamiltonian_routes_match() {
        let q = def(1.4);
        let c = Couplings::uniform();
        let hmat = hamiltonian_matrix(1, q, 3, &c).unwrap();
        let dim = 27;
        let v: Vec<f64> = (0..dim).map(|i| ((i * 37 + 11) % 101) as f64 / 101.0 - 0.5).collect();
        let dense = hmat.matvec(&v);
        let free = apply_hamiltonian(1, q, 3, &c, &v).unwrap();
        for (a, b) in dense.iter().zip(free.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn hamiltonian_gap_probe() {
        for &qv in &[0.5, 1.0, 2.0] {
            let q = def(qv);
            let h = hamiltonian_matrix(1, q, 4, &Couplings::uniform()).unwrap();
            let eigs = sym_eigenvalues(&h);
            assert!(eigs[0].abs() <= 1e-9);
            assert!(eigs[1] > 0.3);
        }
    }

    #[test]
    fn skewed_couplings_keep_the_ground_state() {
        let q = def(0.8);
        let mut c = Couplings::with_default(0.7).unwrap();
        c.set(2, 1, 2.5).unwrap();
        assert_eq!(c.get(2, 1), 2.5);
        assert_eq!(c.get(2, 0), 0.7);
        let psi = mps_state(1, q, 4).unwrap();
        let hv = apply_hamiltonian(1, q, 4, &c, psi.amplitudes()).unwrap();
        assert!(libm::sqrt(dot(&hv, &hv)) <= 1e-10 * libm::sqrt(psi.norm_sq()));
        assert!(Couplings::with_default(0.0).is_err());
        assert!(c.set(2, 0, -1.0).is_err());
    }

    #[test]
    fn oracle_one_point_checks() {
        let q = def(1.3);
        for len in 4..=5 {
            assert!(oracle_correlator(1, q, len, OracleObservable::Sz).unwrap().abs() <= 1e-12);
            let zz = oracle_correlator(1, q, len, OracleObservable::SzSquared).unwrap();
            let mut moment = 0.0;
            let mut total = 0.0;
            for m in -1..=1 {
                let p = oracle_correlator(1, q, len, OracleObservable::Projector { m }).unwrap();
                moment += (m * m) as f64 * p;
                total += p;
            }
            assert!((zz - moment).abs() <= 1e-12);
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_matches_transfer_two_point() {
        for &qv in &[0.5, 1.0, 2.0] {
            let q = def(qv);
            for len in 5..=6 {
                for r in 2..=len {
                    let oz = oracle_correlator(1, q, len, OracleObservable::Zz { r }).unwrap();
                    let tz = two_point_finite(1, q, len, r, PairOp::Zz).unwrap();
                    assert!((oz - tz).abs() <= 1e-12);
                    let op = oracle_correlator(1, q, len, OracleObservable::Pm { r }).unwrap();
                    let tp = two_point_finite(1, q, len, r, PairOp::Pm).unwrap();
                    assert!((op - tp).abs() <= 1e-12);
                }
            }
        }
        let q = def(1.5);
        let oz = oracle_correlator(2, q, 4, OracleObservable::Zz { r: 3 }).unwrap();
        let tz = two_point_finite(2, q, 4, 3, PairOp::Zz).unwrap();
        assert!((oz - tz).abs() <= 1e-12);
    }

    #[test]
    fn q1_site_distribution_is_uniform() {
        let q = def(1.0);
        for m in -1..=1 {
            let p = oracle_correlator(1, q, 4, OracleObservable::Projector { m }).unwrap();
            assert!((p - 1.0 / 3.0).abs() <= 1e-12);
            assert!((p - prob_sz(1, q, m).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn lowering_iterates_match_closed_form() {
        for spin in 1..=2 {
            for &qv in &[0.9, 1.0, 1.1] {
                let q = def(qv);
                for j_tot in 0..=(2 * spin) {
                    for n in 0..=(2 * j_tot + 1) {
                        let rep = verify_proposition1(spin, j_tot, n, q).unwrap();
                        assert!(
                            rep.mismatch <= 1e-10,
                            "S={spin} J={j_tot} n={n} q={qv}: {}",
                            rep.mismatch
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn grouped_lowering_matches_four_term_form() {
        let q = def(0.7);
        for j_tot in 0..=4 {
            let mut cur = highest_weight_vector(2, j_tot, q);
            let mut scale = cur.max_abs();
            for _ in 0..=(2 * j_tot) {
                let grouped = apply_lowering(&cur, q);
                let literal = apply_lowering_literal(&cur, q);
                scale = scale.max(grouped.max_abs()).max(literal.max_abs());
                assert!(grouped.diff_max(&literal) <= 1e-12 * scale);
                cur = grouped;
            }
        }
    }

    #[test]
    fn budget_and_input_guards() {
        let q = def(1.0);
        assert!(matches!(
            mps_state(2, q, 12),
            Err(Error::OverBudget { .. })
        ));
        assert!(matches!(
            hamiltonian_matrix(1, q, 7, &Couplings::uniform()),
            Err(Error::OverBudget { .. })
        ));
        assert!(build_vbs_poly(1, q, 1).is_err());
        assert!(projector(1, 3, q).is_err());
        assert!(verify_proposition1(1, 3, 0, q).is_err());
        assert!(oracle_correlator(1, q, 4, OracleObservable::Zz { r: 1 }).is_err());
        assert!(oracle_correlator(1, q, 4, OracleObservable::Zz { r: 5 }).is_err());
    }
}
