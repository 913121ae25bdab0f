//! Spin-1 local operators and the XXZ chain Hamiltonian with single-ion
//! anisotropy, in dense and matrix-product-operator form.
//!
//! The chain is open: the exchange sum runs over bonds `j = 1..L-1` only.
//! All arithmetic is real; the transverse exchange `SxSx + SySy` enters as
//! `(S+S- + S-S+)/2`, so no complex storage is ever needed.
//!
//! Basis conventions (fixed, relied upon by tests and file formats):
//! local basis order `|+1>, |0>, |-1>`; product states are enumerated
//! lexicographically with site 1 most significant, i.e. the basis index of
//! `|m_1 m_2 ... m_L>` is `sum_j digit(m_j) * 3^(L-j)` with
//! `digit(+1)=0, digit(0)=1, digit(-1)=2`.

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local Hilbert-space dimension of a spin-1 site.
pub const PHYS_DIM: usize = 3;

/// Default ceiling for operations that address the full `3^L` product basis.
pub const DENSE_GUARD_DEFAULT: usize = 14;

/// Hamiltonian parameters: size, Ising anisotropy and single-ion anisotropy.
///
/// Boundary conditions are open by construction; there is no wrap-around bond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites, `L >= 1`.
    pub l: usize,
    /// Ising-like exchange anisotropy (the `lambda Sz Sz` bond coupling).
    pub lambda: f64,
    /// Uniaxial single-ion anisotropy (the `D (Sz)^2` on-site term).
    pub d: f64,
}

impl ModelParams {
    pub fn new(l: usize, lambda: f64, d: f64) -> Result<Self> {
        if l < 1 {
            return Err(Error::Domain("L must be >= 1".into()));
        }
        if !lambda.is_finite() || !d.is_finite() {
            return Err(Error::Domain(format!(
                "parameters must be finite, got lambda={lambda}, d={d}"
            )));
        }
        Ok(ModelParams { l, lambda, d })
    }

    /// Full product-basis dimension `3^L`.
    pub fn dim(&self) -> usize {
        PHYS_DIM.pow(self.l as u32)
    }
}

/// The spin-1 operator set as 3x3 real matrices in the basis `|+1>, |0>, |-1>`.
///
/// `Sy` is purely imaginary; it is stored through `sy_imag` with
/// `Sy = i * sy_imag`, which keeps every matrix here real.
#[derive(Debug, Clone)]
pub struct LocalOps {
    pub sx: Array2<f64>,
    pub sy_imag: Array2<f64>,
    pub sz: Array2<f64>,
    pub sz2: Array2<f64>,
    pub sp: Array2<f64>,
    pub sm: Array2<f64>,
}

impl LocalOps {
    pub fn spin_one() -> Self {
        let rt2 = std::f64::consts::SQRT_2;
        let mut sp = Array2::zeros((3, 3));
        // S+|0> = sqrt(2)|+1>, S+|-1> = sqrt(2)|0>
        sp[[0, 1]] = rt2;
        sp[[1, 2]] = rt2;
        let sm = sp.t().to_owned();
        let sx = (&sp + &sm) / 2.0;
        // Sy = (S+ - S-)/(2i) = i*(S- - S+)/2
        let sy_imag = (&sm - &sp) / 2.0;
        let sz = Array2::from_diag(&ndarray::arr1(&[1.0, 0.0, -1.0]));
        let sz2 = sz.dot(&sz);
        LocalOps {
            sx,
            sy_imag,
            sz,
            sz2,
            sp,
            sm,
        }
    }

    /// Identity on one site.
    pub fn id() -> Array2<f64> {
        Array2::eye(3)
    }
}

/// Magnetization `m in {+1, 0, -1}` of a basis digit (0, 1, 2).
#[inline]
pub(crate) fn digit_to_m(digit: usize) -> i64 {
    1 - digit as i64
}

/// Base-3 digits of a product-state code, site 1 first (most significant).
pub(crate) fn code_to_digits(code: usize, l: usize) -> Vec<usize> {
    let mut digits = vec![0usize; l];
    let mut c = code;
    for j in (0..l).rev() {
        digits[j] = c % 3;
        c /= 3;
    }
    digits
}

pub(crate) fn digits_to_code(digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 3 + d)
}

/// Total `Sz` of a product-state code.
pub(crate) fn code_total_sz(code: usize, l: usize) -> i64 {
    let mut c = code;
    let mut sz = 0i64;
    for _ in 0..l {
        sz += digit_to_m(c % 3);
        c /= 3;
    }
    sz
}

/// Builds the dense Hamiltonian matrix over the full `3^L` product basis.
///
/// `H = sum_{j<L} [(S+_j S-_{j+1} + S-_j S+_{j+1})/2 + lambda Sz_j Sz_{j+1}]
///      + D sum_j (Sz_j)^2`.
///
/// The result is exactly symmetric: both members of every off-diagonal pair
/// are written from the same hop enumeration, and all hop amplitudes are
/// exactly 1 for spin 1.
pub fn build_dense(params: &ModelParams) -> Result<Array2<f64>> {
    build_dense_guarded(params, DENSE_GUARD_DEFAULT)
}

/// Same as [`build_dense`] with an explicit size guard.
pub fn build_dense_guarded(params: &ModelParams, guard: usize) -> Result<Array2<f64>> {
    if params.l > guard {
        return Err(Error::SizeGuard {
            l: params.l,
            guard,
        });
    }
    let l = params.l;
    let dim = params.dim();
    let mut h = Array2::<f64>::zeros((dim, dim));
    let fill_row = |row: usize, h_row: &mut [f64]| {
        let digits = code_to_digits(row, l);
        h_row[row] += diagonal_energy(&digits, params);
        for (target, amp) in hops_from(&digits) {
            h_row[target] += amp;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use ndarray::Axis;
        use rayon::prelude::*;
        h.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(row, mut r)| fill_row(row, r.as_slice_mut().expect("row contiguous")));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (row, mut r) in h.rows_mut().into_iter().enumerate() {
            fill_row(row, r.as_slice_mut().expect("row contiguous"));
        }
    }
    Ok(h)
}

/// Diagonal matrix element of a product state given by its digits.
pub(crate) fn diagonal_energy(digits: &[usize], params: &ModelParams) -> f64 {
    let l = digits.len();
    let mut e = 0.0;
    for j in 0..l {
        let m = digit_to_m(digits[j]) as f64;
        e += params.d * m * m;
        if j + 1 < l {
            let m2 = digit_to_m(digits[j + 1]) as f64;
            e += params.lambda * m * m2;
        }
    }
    e
}

/// All states reachable from `digits` by one transverse-exchange hop,
/// with their amplitudes. For spin 1 every allowed hop has amplitude
/// exactly `(1/2) * sqrt(2) * sqrt(2) = 1`.
pub(crate) fn hops_from(digits: &[usize]) -> Vec<(usize, f64)> {
    let l = digits.len();
    let mut out = Vec::with_capacity(2 * l);
    let mut work = digits.to_vec();
    for j in 0..l.saturating_sub(1) {
        let (a, b) = (digits[j], digits[j + 1]);
        // (S+_j S-_{j+1})/2: raise m_j (digit-1), lower m_{j+1} (digit+1)
        if a > 0 && b < 2 {
            work[j] = a - 1;
            work[j + 1] = b + 1;
            out.push((digits_to_code(&work), 1.0));
            work[j] = a;
            work[j + 1] = b;
        }
        // (S-_j S+_{j+1})/2: lower m_j, raise m_{j+1}
        if a < 2 && b > 0 {
            work[j] = a + 1;
            work[j + 1] = b - 1;
            out.push((digits_to_code(&work), 1.0));
            work[j] = a;
            work[j + 1] = b;
        }
    }
    out
}

/// Matrix-product-operator form of the Hamiltonian.
///
/// Site tensors have shape `(bond_in, bond_out, 3, 3)` with the physical
/// indices ordered `(out, in)`. The bulk bond dimension is 5; the first and
/// last tensors are the boundary row and column of the bulk operator-valued
/// matrix.
#[derive(Debug, Clone)]
pub struct HamiltonianMpo {
    pub tensors: Vec<Array4<f64>>,
}

impl HamiltonianMpo {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Contracts all bond indices into the dense Hamiltonian. Test bridge;
    /// memory grows as `9^L`, so a small guard applies.
    pub fn to_dense(&self) -> Result<Array2<f64>> {
        let l = self.len();
        if l > 8 {
            return Err(Error::SizeGuard { l, guard: 8 });
        }
        // cur[b] = operator on the sites contracted so far, for each open bond b
        let first = &self.tensors[0];
        let mut cur: Vec<Array2<f64>> = (0..first.dim().1)
            .map(|b| {
                let mut op = Array2::zeros((3, 3));
                for so in 0..3 {
                    for si in 0..3 {
                        op[[so, si]] = first[[0, b, so, si]];
                    }
                }
                op
            })
            .collect();
        for w in &self.tensors[1..] {
            let (wl, wr, _, _) = w.dim();
            assert_eq!(wl, cur.len());
            let dim_in = cur[0].nrows();
            let mut next: Vec<Array2<f64>> =
                vec![Array2::zeros((dim_in * 3, dim_in * 3)); wr];
            for (b, op) in cur.iter().enumerate() {
                for c in 0..wr {
                    for so in 0..3 {
                        for si in 0..3 {
                            let coeff = w[[b, c, so, si]];
                            if coeff != 0.0 {
                                // next[c] += op (x) coeff |so><si|
                                for i in 0..dim_in {
                                    for j in 0..dim_in {
                                        let v = op[[i, j]] * coeff;
                                        if v != 0.0 {
                                            next[c][[i * 3 + so, j * 3 + si]] += v;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        assert_eq!(cur.len(), 1);
        Ok(cur.pop().unwrap())
    }
}

/// Builds the bond-dimension-5 MPO for the Hamiltonian. Requires `L >= 2`.
pub fn build_mpo(params: &ModelParams) -> Result<HamiltonianMpo> {
    if params.l < 2 {
        return Err(Error::Domain(format!(
            "MPO needs at least 2 sites, got L={}",
            params.l
        )));
    }
    let ops = LocalOps::spin_one();
    let id = LocalOps::id();
    let zero = Array2::<f64>::zeros((3, 3));
    let half_sm = &ops.sm * 0.5;
    let half_sp = &ops.sp * 0.5;
    let lam_sz = &ops.sz * params.lambda;
    let d_sz2 = &ops.sz2 * params.d;

    // Bulk operator-valued matrix, lower-triangular form.
    let bulk_rows: [[&Array2<f64>; 5]; 5] = [
        [&id, &zero, &zero, &zero, &zero],
        [&ops.sp, &zero, &zero, &zero, &zero],
        [&ops.sm, &zero, &zero, &zero, &zero],
        [&ops.sz, &zero, &zero, &zero, &zero],
        [&d_sz2, &half_sm, &half_sp, &lam_sz, &id],
    ];

    let pack = |rows: &[Vec<&Array2<f64>>]| -> Array4<f64> {
        let wl = rows.len();
        let wr = rows[0].len();
        let mut t = Array4::zeros((wl, wr, 3, 3));
        for (a, row) in rows.iter().enumerate() {
            for (b, op) in row.iter().enumerate() {
                for so in 0..3 {
                    for si in 0..3 {
                        t[[a, b, so, si]] = op[[so, si]];
                    }
                }
            }
        }
        t
    };

    let first = pack(&[bulk_rows[4].to_vec()]);
    let bulk = pack(
        &bulk_rows
            .iter()
            .map(|r| r.to_vec())
            .collect::<Vec<_>>(),
    );
    let last = pack(
        &bulk_rows
            .iter()
            .map(|r| vec![r[0]])
            .collect::<Vec<_>>(),
    );

    let mut tensors = Vec::with_capacity(params.l);
    tensors.push(first);
    for _ in 1..params.l - 1 {
        tensors.push(bulk.clone());
    }
    tensors.push(last);
    Ok(HamiltonianMpo { tensors })
}

/// Indices of the product basis states with total `Sz = sz_total`, in
/// ascending order. Sectors partition the full basis.
pub fn total_sz_sector_basis(l: usize, sz_total: i64) -> Result<Vec<usize>> {
    if l < 1 {
        return Err(Error::Domain("L must be >= 1".into()));
    }
    if sz_total.unsigned_abs() as usize > l {
        return Err(Error::Domain(format!(
            "sector Sz={sz_total} is empty for L={l}"
        )));
    }
    // Depth-first enumeration in lexicographic (ascending code) order.
    let mut out = Vec::new();
    let mut digits = vec![0usize; l];
    enumerate_sector(&mut out, &mut digits, 0, 0, l, sz_total);
    Ok(out)
}

fn enumerate_sector(
    out: &mut Vec<usize>,
    digits: &mut [usize],
    site: usize,
    partial_sz: i64,
    l: usize,
    target: i64,
) {
    let remaining = (l - site) as i64;
    // Prune: remaining sites can shift total Sz by at most +-remaining.
    if (target - partial_sz).abs() > remaining {
        return;
    }
    if site == l {
        out.push(digits_to_code(digits));
        return;
    }
    for d in 0..3 {
        digits[site] = d;
        enumerate_sector(out, digits, site + 1, partial_sz + digit_to_m(d), l, target);
    }
    digits[site] = 0;
}
