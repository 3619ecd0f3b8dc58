//! The transfer matrix G of the q-VBS matrix product state, operator-inserted
//! matrices G_A, and the block decomposition by diagonal shift.
//!
//! G acts on the (S+1)^2-dimensional space W spanned by |a,b>> with
//! 0 <= a,b <= S. Basis ordering is row-major: flat index a*(S+1) + b.
//! Every entry is h_ac * h_bd gated by a shift rule; since nonzero entries
//! require c - a = d - b (+/- 1 for ladder insertions), G and G_{S^z} are
//! block diagonal in j = b - a. Block bases are |i, i+j>> for j >= 0 and
//! |i+|j|, i>> for j < 0, ordered by increasing i.

use crate::matrix::DMat;
use crate::qarith::{neg_one_pow, q_binomial, q_factorial, Deformation};
use crate::Error;

use alloc::vec;
use alloc::vec::Vec;

/// The (S+1) x (S+1) coefficients h_{ii'} of the site tensor: the matrix
/// entries of the local vector-valued MPS matrix, shared by G and every G_A.
#[derive(Debug, Clone)]
pub struct HCoefficients {
    spin: i64,
    q: Deformation,
    mat: DMat,
}

/// h_{ii'} = (-1)^{S-i} q^{(i+i'-S)(S+1)/2}
///           sqrt( qbin(S,i) qbin(S,i') [S-i+i']! [S+i-i']! ).
pub fn h_coefficients(spin: i64, q: Deformation) -> Result<HCoefficients, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    let n = (spin + 1) as usize;
    let mat = DMat::from_fn(n, n, |iu, ju| {
        let (i, ip) = (iu as i64, ju as i64);
        let inner = q_binomial(spin, i, q)
            * q_binomial(spin, ip, q)
            * q_factorial(spin - i + ip, q)
            * q_factorial(spin + i - ip, q);
        neg_one_pow(spin - i) * q.pow_half((i + ip - spin) * (spin + 1)) * libm::sqrt(inner)
    });
    Ok(HCoefficients { spin, q, mat })
}

impl HCoefficients {
    pub fn spin(&self) -> i64 {
        self.spin
    }

    pub fn q(&self) -> Deformation {
        self.q
    }

    pub fn entry(&self, i: usize, ip: usize) -> f64 {
        self.mat.at(i, ip)
    }

    pub fn matrix(&self) -> &DMat {
        &self.mat
    }
}

/// The transfer matrix G with entries <<a,b|G|c,d>> = delta_{c-a,d-b} h_ac h_bd.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    spin: i64,
    q: Deformation,
    mat: DMat,
}

pub fn transfer_matrix(spin: i64, q: Deformation) -> Result<TransferMatrix, Error> {
    let h = h_coefficients(spin, q)?;
    let n = (spin + 1) as usize;
    let dim = n * n;
    let mat = DMat::from_fn(dim, dim, |row, col| {
        let (a, b) = (row / n, row % n);
        let (c, d) = (col / n, col % n);
        if c as i64 - a as i64 == d as i64 - b as i64 {
            h.entry(a, c) * h.entry(b, d)
        } else {
            0.0
        }
    });
    Ok(TransferMatrix { spin, q, mat })
}

impl TransferMatrix {
    pub fn spin(&self) -> i64 {
        self.spin
    }

    pub fn q(&self) -> Deformation {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMat {
        &self.mat
    }

    /// Restriction to the shift-j subspace W_j, dimension S - |j| + 1.
    pub fn block(&self, j: i64) -> Result<DMat, Error> {
        block_of(&self.mat, self.spin, j)
    }
}

/// One-site operator tags with ready-made insertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionKind {
    Sz,
    SPlus,
    SMinus,
}

/// The operator-inserted matrix G_A for A in {S^z, S^+, S^-}. G_{S^z} keeps
/// the c - a = d - b shift rule; the ladder insertions connect column blocks
/// to row blocks shifted by -+1.
#[derive(Debug, Clone)]
pub struct OperatorInsertion {
    spin: i64,
    q: Deformation,
    kind: InsertionKind,
    mat: DMat,
}

pub fn operator_insertion(
    spin: i64,
    q: Deformation,
    kind: InsertionKind,
) -> Result<OperatorInsertion, Error> {
    let site = match kind {
        InsertionKind::Sz => site_spin_z(spin)?,
        InsertionKind::SPlus => site_spin_plus(spin)?,
        InsertionKind::SMinus => site_spin_minus(spin)?,
    };
    let mat = site_operator_insertion(spin, q, &site)?;
    Ok(OperatorInsertion { spin, q, kind, mat })
}

impl OperatorInsertion {
    pub fn spin(&self) -> i64 {
        self.spin
    }

    pub fn q(&self) -> Deformation {
        self.q
    }

    pub fn kind(&self) -> InsertionKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMat {
        &self.mat
    }

    /// Only the S^z insertion is block diagonal; ladder insertions shift
    /// blocks and have no restriction to a single W_j.
    pub fn block(&self, j: i64) -> Result<DMat, Error> {
        if self.kind != InsertionKind::Sz {
            return Err(Error::OutOfRange("block extraction (needs a shift-preserving matrix)"));
        }
        block_of(&self.mat, self.spin, j)
    }
}

/// G_A for an arbitrary one-site operator A given as its (2S+1) x (2S+1)
/// matrix <S;m|A|S;m'> with basis index m + S:
/// <<a,b|G_A|c,d>> = h_ac h_bd <S; c-a|A|S; d-b>.
pub fn site_operator_insertion(spin: i64, q: Deformation, op: &DMat) -> Result<DMat, Error> {
    let h = h_coefficients(spin, q)?;
    let site = (2 * spin + 1) as usize;
    if op.nrows() != site || op.ncols() != site {
        return Err(Error::OutOfRange("site operator dimension (must be 2S+1)"));
    }
    let n = (spin + 1) as usize;
    let dim = n * n;
    Ok(DMat::from_fn(dim, dim, |row, col| {
        let (a, b) = (row / n, row % n);
        let (c, d) = (col / n, col % n);
        let mrow = c as i64 - a as i64 + spin;
        let mcol = d as i64 - b as i64 + spin;
        // shifts always lie in 0..2S+1 for 0 <= a,c <= S
        h.entry(a, c) * h.entry(b, d) * op.at(mrow as usize, mcol as usize)
    }))
}

/// <S;m|S^z|S;m'> = m delta_{mm'}, basis index m + S.
pub fn site_spin_z(spin: i64) -> Result<DMat, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    let site = (2 * spin + 1) as usize;
    Ok(DMat::from_fn(site, site, |r, c| {
        if r == c {
            r as f64 - spin as f64
        } else {
            0.0
        }
    }))
}

/// <S;m|S^+|S;m'> = sqrt((S-m')(S+m'+1)) delta_{m,m'+1}. The ladder factors
/// are the plain su(2) ones; the deformation enters only through h.
pub fn site_spin_plus(spin: i64) -> Result<DMat, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    let site = (2 * spin + 1) as usize;
    Ok(DMat::from_fn(site, site, |r, c| {
        let mp = c as i64 - spin;
        if r as i64 == c as i64 + 1 {
            libm::sqrt(((spin - mp) * (spin + mp + 1)) as f64)
        } else {
            0.0
        }
    }))
}

/// <S;m|S^-|S;m'> = sqrt((S+m')(S-m'+1)) delta_{m,m'-1}.
pub fn site_spin_minus(spin: i64) -> Result<DMat, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    let site = (2 * spin + 1) as usize;
    Ok(DMat::from_fn(site, site, |r, c| {
        let mp = c as i64 - spin;
        if r as i64 + 1 == c as i64 {
            libm::sqrt(((spin + mp) * (spin - mp + 1)) as f64)
        } else {
            0.0
        }
    }))
}

/// |S;m><S;m| as a site operator.
pub fn site_projector(spin: i64, m: i64) -> Result<DMat, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    if m.abs() > spin {
        return Err(Error::OutOfRange("magnetic quantum number (|m| <= S)"));
    }
    let site = (2 * spin + 1) as usize;
    let idx = (m + spin) as usize;
    Ok(DMat::from_fn(site, site, |r, c| {
        if r == idx && c == idx {
            1.0
        } else {
            0.0
        }
    }))
}

/// Flat W indices of the shift-j block basis, in basis order.
pub fn block_indices(spin: i64, j: i64) -> Result<Vec<usize>, Error> {
    if spin < 1 {
        return Err(Error::OutOfRange("spin (must be >= 1)"));
    }
    if j.abs() > spin {
        return Err(Error::OutOfRange("block shift (|j| <= S)"));
    }
    let n = (spin + 1) as usize;
    let len = (spin - j.abs() + 1) as usize;
    let mut idx = Vec::with_capacity(len);
    for i in 0..len {
        let (a, b) = if j >= 0 {
            (i, i + j as usize)
        } else {
            (i + (-j) as usize, i)
        };
        idx.push(a * n + b);
    }
    Ok(idx)
}

/// Restriction of a shift-preserving (S+1)^2 matrix to block j.
pub fn block_of(mat: &DMat, spin: i64, j: i64) -> Result<DMat, Error> {
    let idx = block_indices(spin, j)?;
    Ok(DMat::from_fn(idx.len(), idx.len(), |r, c| {
        mat.at(idx[r], idx[c])
    }))
}

/// Pads a block-j vector with zeros into a full W vector, for matrix elements
/// of insertions that connect different blocks.
pub fn embed_block_vector(spin: i64, j: i64, v: &[f64]) -> Result<Vec<f64>, Error> {
    let idx = block_indices(spin, j)?;
    if v.len() != idx.len() {
        return Err(Error::OutOfRange("block vector length"));
    }
    let n = (spin + 1) as usize;
    let mut full = vec![0.0; n * n];
    for (k, &flat) in idx.iter().enumerate() {
        full[flat] = v[k];
    }
    Ok(full)
}
