//! Ground-state expectation values from transfer-matrix contractions: norms,
//! one-point functions, two-point functions on finite rings and in the
//! thermodynamic limit, and the closed-form large-distance asymptotics.
//!
//! Operators sit at sites 1 and r of a periodic chain of length L, so the
//! lattice separation is r - 1 and the minimal two-point distance is r = 2.
//! Finite-chain traces are evaluated with G / lambda_0 to keep every
//! intermediate O(1); only the chain norm itself needs a log-scaled carrier.

use crate::matrix::{dot, DMat};
use crate::qarith::{q_binomial, q_factorial, q_integer, Deformation};
use crate::spectral::{eigenvalue_closed, eigenvector, squared_norm_closed};
use crate::transfer::{
    embed_block_vector, operator_insertion, site_operator_insertion, site_projector, site_spin_z,
    transfer_matrix, InsertionKind,
};
use crate::Error;

/// One-site observables for expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnePointOp {
    Sz,
    SzSquared,
    Projector(i64),
}

/// Two-point observable pairs: A at site 1, B at site r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOp {
    /// A = B = S^z.
    Zz,
    /// A = S^+, B = S^-.
    Pm,
}

/// A signed magnitude carried as (sign, ln |x|), for quantities such as
/// squared chain norms that overflow f64 long before L gets interesting.
#[derive(Debug, Clone, Copy)]
pub struct ScaledValue {
    sign: f64,
    ln_abs: f64,
}

impl ScaledValue {
    fn from_scaled(x: f64, ln_scale: f64) -> ScaledValue {
        if x == 0.0 {
            ScaledValue {
                sign: 0.0,
                ln_abs: f64::NEG_INFINITY,
            }
        } else {
            ScaledValue {
                sign: if x > 0.0 { 1.0 } else { -1.0 },
                ln_abs: libm::log(x.abs()) + ln_scale,
            }
        }
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// May overflow to +-inf; use `ln_abs` when the magnitude matters.
    pub fn value(&self) -> f64 {
        self.sign * libm::exp(self.ln_abs)
    }
}

fn check_spin(spin: i64) -> Result<(), Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    Ok(())
}

fn check_len(len: i64) -> Result<(), Error> {
    if len < 1 {
        return Err(Error::OutOfRange("chain length (L >= 1)"));
    }
    Ok(())
}

fn site_matrix(spin: i64, op: OnePointOp) -> Result<DMat, Error> {
    match op {
        OnePointOp::Sz => site_spin_z(spin),
        OnePointOp::SzSquared => {
            let z = site_spin_z(spin)?;
            Ok(z.mul(&z))
        }
        OnePointOp::Projector(m) => site_projector(spin, m),
    }
}

fn pair_insertions(spin: i64, q: Deformation, pair: PairOp) -> Result<(DMat, DMat), Error> {
    Ok(match pair {
        PairOp::Zz => {
            let gz = operator_insertion(spin, q, InsertionKind::Sz)?;
            (gz.matrix().clone(), gz.matrix().clone())
        }
        PairOp::Pm => (
            operator_insertion(spin, q, InsertionKind::SPlus)?.matrix().clone(),
            operator_insertion(spin, q, InsertionKind::SMinus)?.matrix().clone(),
        ),
    })
}

/// <Psi|Psi> = Tr G^L on the ring of L sites.
pub fn norm_sq_finite(spin: i64, q: Deformation, len: i64) -> Result<ScaledValue, Error> {
    check_spin(spin)?;
    check_len(len)?;
    let g = transfer_matrix(spin, q)?;
    let lam0 = eigenvalue_closed(spin, 0, q)?;
    let t = g.matrix().scaled(1.0 / lam0).pow(len as u64).trace();
    Ok(ScaledValue::from_scaled(t, len as f64 * libm::log(lam0)))
}

/// <A_1> = Tr(G_A G^{L-1}) / Tr G^L.
pub fn one_point_finite(spin: i64, q: Deformation, len: i64, op: OnePointOp) -> Result<f64, Error> {
    check_spin(spin)?;
    check_len(len)?;
    let ga = site_operator_insertion(spin, q, &site_matrix(spin, op)?)?;
    let g = transfer_matrix(spin, q)?;
    let lam0 = eigenvalue_closed(spin, 0, q)?;
    let ghat = g.matrix().scaled(1.0 / lam0);
    let num = ga.mul(&ghat.pow((len - 1) as u64)).trace();
    let den = ghat.pow(len as u64).trace();
    Ok(num / (lam0 * den))
}

/// <A_1 B_r> = Tr(G_A G^{r-2} G_B G^{L-r}) / Tr G^L, with A at site 1 and
/// B at site r, 2 <= r <= L.
pub fn two_point_finite(
    spin: i64,
    q: Deformation,
    len: i64,
    r: i64,
    pair: PairOp,
) -> Result<f64, Error> {
    check_spin(spin)?;
    if len < 2 {
        return Err(Error::OutOfRange("chain length (L >= 2)"));
    }
    if r < 2 || r > len {
        return Err(Error::OutOfRange("separation (2 <= r <= L)"));
    }
    let (ga, gb) = pair_insertions(spin, q, pair)?;
    let g = transfer_matrix(spin, q)?;
    let lam0 = eigenvalue_closed(spin, 0, q)?;
    let ghat = g.matrix().scaled(1.0 / lam0);
    let num = ga
        .mul(&ghat.pow((r - 2) as u64))
        .mul(&gb)
        .mul(&ghat.pow((len - r) as u64))
        .trace();
    let den = ghat.pow(len as u64).trace();
    Ok(num / (lam0 * lam0 * den))
}

/// Thermodynamic-limit one-point function
/// <A> = <<lambda_0| G_A |lambda_0>> / (lambda_0 n_{0,0}).
pub fn one_point_thermo(spin: i64, q: Deformation, op: OnePointOp) -> Result<f64, Error> {
    check_spin(spin)?;
    let ga = site_operator_insertion(spin, q, &site_matrix(spin, op)?)?;
    let lam0 = eigenvalue_closed(spin, 0, q)?;
    let n00 = squared_norm_closed(spin, 0, 0, q)?;
    let u = embed_block_vector(spin, 0, &eigenvector(spin, 0, 0, q)?)?;
    Ok(dot(&u, &ga.matvec(&u)) / (lam0 * n00))
}

/// Thermodynamic-limit probability of reading S^z = m at one site:
/// ([S+m]! [S-m]! / [2S+1]!) sum_i q^{(S+2)(2i-m-S)} qbin(S,i-m) qbin(S,i).
pub fn prob_sz(spin: i64, q: Deformation, m: i64) -> Result<f64, Error> {
    check_spin(spin)?;
    if m.abs() > spin {
        return Err(Error::OutOfRange("magnetic quantum number (|m| <= S)"));
    }
    let s = spin;
    let pref = q_factorial(s + m, q) * q_factorial(s - m, q) / q_factorial(2 * s + 1, q);
    let mut sum = 0.0;
    for i in 0..=s {
        sum += q.powi((s + 2) * (2 * i - m - s)) * q_binomial(s, i - m, q) * q_binomial(s, i, q);
    }
    Ok(pref * sum)
}

/// Thermodynamic-limit two-point function as a spectral sum,
/// <A_1 B_r> = sum_{l,j} (lambda_l / lambda_0)^r lambda_l^{-2}
///   <<lambda_0|G_A|lambda_l>>_j <<lambda_l|G_B|lambda_0>>_0 / (n_{0,0} n_{l,j}),
/// with leading-one eigenvectors throughout.
pub fn two_point_thermo(spin: i64, q: Deformation, r: i64, pair: PairOp) -> Result<f64, Error> {
    check_spin(spin)?;
    if r < 2 {
        return Err(Error::OutOfRange("separation (r >= 2)"));
    }
    let (ga, gb) = pair_insertions(spin, q, pair)?;
    let lam0 = eigenvalue_closed(spin, 0, q)?;
    let n00 = squared_norm_closed(spin, 0, 0, q)?;
    let u = embed_block_vector(spin, 0, &eigenvector(spin, 0, 0, q)?)?;
    let mut sum = 0.0;
    for l in 0..=spin {
        let lam = eigenvalue_closed(spin, l, q)?;
        let decay = libm::pow(lam / lam0, r as f64) / (lam * lam);
        for j in -l..=l {
            let w = embed_block_vector(spin, j, &eigenvector(spin, l, j, q)?)?;
            let me_a = dot(&u, &ga.matvec(&w));
            let me_b = dot(&w, &gb.matvec(&u));
            let nlj = squared_norm_closed(spin, l, j, q)?;
            sum += decay * me_a * me_b / (n00 * nlj);
        }
    }
    Ok(sum)
}

/// Closed form of <<lambda_1|G_{S^z}|lambda_0>> in block zero, the matrix
/// element driving the large-distance S^z S^z correlator. The printed ratio
/// ( q^{S+1} + q^{-S-1} - (q+q^{-1}) q^{2i'-S} ) / ( q^S - q^{-S} ) is
/// carried as ( q^{i'+1}[S-i'] - q^{i'-1-S}[i'] ) / [S], which is the same
/// rational function without the removable 0/0 at q = 1.
pub fn matrix_element_zz(spin: i64, q: Deformation) -> Result<f64, Error> {
    check_spin(spin)?;
    let s = spin;
    let qs = q_integer(s, q);
    let mut sum = 0.0;
    for i in 0..=s {
        for ip in 0..=s {
            let bracket = (q.powi(ip + 1) * q_integer(s - ip, q)
                - q.powi(ip - 1 - s) * q_integer(ip, q))
                / qs;
            sum += (i - ip) as f64
                * q.powi((s + 2) * (i + ip))
                * bracket
                * q_factorial(s + i - ip, q)
                * q_factorial(s + ip - i, q)
                * q_binomial(s, i, q)
                * q_binomial(s, ip, q);
        }
    }
    Ok(q.powi(-s * s - s - 1) * sum)
}

/// Closed form of <<lambda_1|G_{S^-}|lambda_0>> between block -1 and block
/// zero, driving the large-distance S^+ S^- correlator. The ladder factors
/// (S -+ m)(S +- m + 1) stay undeformed next to their bracket images.
pub fn matrix_element_pm(spin: i64, q: Deformation) -> Result<f64, Error> {
    check_spin(spin)?;
    let s = spin;
    let mut sum = 0.0;
    for i in 0..=s {
        for ip in 0..=(s - 1) {
            let root = q_binomial(s, ip + 1, q)
                * q_binomial(s, ip, q)
                * ((s + i - ip) as f64)
                * q_integer(s + i - ip, q)
                * ((s - i + ip + 1) as f64)
                * q_integer(s - i + ip + 1, q)
                * q_integer(ip + 1, q)
                * q_integer(s - ip, q)
                / q_integer(s, q);
            sum += q.powi((s + 2) * i + (s + 3) * ip)
                * libm::sqrt(root)
                * q_factorial(s + ip - i, q)
                * q_factorial(s + i - ip - 1, q)
                * q_binomial(s, i, q);
        }
    }
    Ok(-q.pow_half(-2 * s * s - s + 1) * sum)
}

/// xi = 1 / ln([S+2]/[S]): decay length of the (lambda_1/lambda_0)^r tail.
pub fn correlation_length(spin: i64, q: Deformation) -> Result<f64, Error> {
    check_spin(spin)?;
    Ok(1.0 / libm::log(q_integer(spin + 2, q) / q_integer(spin, q)))
}

/// Smallest r >= 2 at which the first neglected mode, damped like
/// ([S-1]/[S+3])^r relative to the kept one, drops below 1e-6.
pub fn validity_radius(spin: i64, q: Deformation) -> Result<i64, Error> {
    check_spin(spin)?;
    let x = q_integer(spin - 1, q) / q_integer(spin + 3, q);
    let mut r = 2i64;
    while libm::pow(x, r as f64) >= 1e-6 {
        r += 1;
    }
    Ok(r)
}

/// Leading large-r behaviour amplitude * ratio^r of a two-point function.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticResult {
    pub amplitude: f64,
    /// lambda_1 / lambda_0 = -[S]/[S+2].
    pub ratio: f64,
    pub correlation_length: f64,
    pub validity_radius: i64,
}

impl AsymptoticResult {
    pub fn value(&self, r: i64) -> f64 {
        self.amplitude * libm::pow(self.ratio, r as f64)
    }
}

pub fn asymptotic(spin: i64, q: Deformation, pair: PairOp) -> Result<AsymptoticResult, Error> {
    check_spin(spin)?;
    let s = spin;
    let ratio = -q_integer(s, q) / q_integer(s + 2, q);
    let f2s1 = q_factorial(2 * s + 1, q);
    let amplitude = match pair {
        PairOp::Zz => {
            let me = matrix_element_zz(s, q)?;
            -q_integer(3, q) * q_integer(s + 2, q) * me * me
                / (q.powi(2 * s - 2) * q_integer(s, q) * f2s1 * f2s1)
        }
        PairOp::Pm => {
            let me = matrix_element_pm(s, q)?;
            let d = f2s1 * q_integer(s, q);
            -q_integer(2, q) * q_integer(3, q) * q_integer(s + 2, q) * me * me
                / (q.powi(3 * s - 2) * d * d)
        }
    };
    Ok(AsymptoticResult {
        amplitude,
        ratio,
        correlation_length: correlation_length(s, q)?,
        validity_radius: validity_radius(s, q)?,
    })
}
