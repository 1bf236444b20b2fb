//! Brute-force fermionic Fock space for small mode counts.
//!
//! Basis states are occupation strings with mode 0 in the least significant
//! bit. `a_n†` acting on a string without bit `n` sets it and picks up
//! `(-1)^{#occupied modes below n}`. Every operator is kept in compressed
//! row form: ladder operators have at most one entry per row, and bilinears
//! at most `M²/4 + M` entries per row.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::OneBodyKernel;
use crate::vacua::OccupationSet;

pub const MAX_MODES: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square sparse operator in compressed row storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOp {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            row_start[r + 1] += 1;
            cols.push(c);
            vals.push(v);
            last = Some((r, c));
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        Self {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_start: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![Complex64::new(1.0, 0.0); dim],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn adjoint(&self) -> SparseOp {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseOp::from_triplets(self.dim, t)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "operator/vector dimension mismatch");
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, a)| a * v[c]).sum())
            .collect()
    }

    pub fn mul(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        let mut t = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        SparseOp::from_triplets(self.dim, t)
    }

    pub fn add(&self, other: &SparseOp) -> SparseOp {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SparseOp) -> SparseOp {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &SparseOp, s: Complex64) -> SparseOp {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        let t = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * s)))
            .collect();
        SparseOp::from_triplets(self.dim, t)
    }

    pub fn scale(&self, s: Complex64) -> SparseOp {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }
}

/// Unit-norm many-body state in the occupation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨self|A|self⟩`.
    pub fn expectation(&self, op: &SparseOp) -> Complex64 {
        self.inner(&op.matvec(&self.amplitudes))
    }

    pub fn apply(&self, op: &SparseOp) -> FockVector {
        FockVector {
            amplitudes: op.matvec(&self.amplitudes),
        }
    }
}

fn sign_below(state: usize, n: usize) -> f64 {
    if (state & ((1usize << n) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Creation and annihilation operators for `M` modes.
#[derive(Clone, Debug)]
pub struct LadderSet {
    mode_count: usize,
    annihilators: Vec<SparseOp>,
    creators: Vec<SparseOp>,
}

pub fn build_ladders(mode_count: usize) -> Result<LadderSet> {
    if mode_count == 0 || mode_count > MAX_MODES {
        return Err(Error::ModeCount(mode_count));
    }
    let dim = 1usize << mode_count;
    let creators: Vec<SparseOp> = (0..mode_count)
        .map(|n| {
            let t = (0..dim)
                .filter(|s| s & (1 << n) == 0)
                .map(|s| (s | (1 << n), s, Complex64::new(sign_below(s, n), 0.0)))
                .collect();
            SparseOp::from_triplets(dim, t)
        })
        .collect();
    let annihilators = creators.iter().map(SparseOp::adjoint).collect();
    Ok(LadderSet {
        mode_count,
        annihilators,
        creators,
    })
}

impl LadderSet {
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn dim(&self) -> usize {
        1 << self.mode_count
    }

    pub fn annihilator(&self, n: usize) -> &SparseOp {
        &self.annihilators[n]
    }

    pub fn creator(&self, n: usize) -> &SparseOp {
        &self.creators[n]
    }

    pub fn bare_vacuum(&self) -> FockVector {
        FockVector::basis_state(self.dim(), 0)
    }

    /// Largest entrywise violation of the canonical anticommutation relations
    /// over all mode pairs; each relation is symmetric in `(m, n)`.
    pub fn anticommutator_error(&self) -> f64 {
        let id = SparseOp::identity(self.dim());
        let mut worst: f64 = 0.0;
        for m in 0..self.mode_count {
            for n in m..self.mode_count {
                let (am, an) = (&self.annihilators[m], &self.annihilators[n]);
                let (cm, cn) = (&self.creators[m], &self.creators[n]);
                let mixed = am.mul(cn).add(&cn.mul(am));
                let mixed = if m == n { mixed.sub(&id) } else { mixed };
                let aa = am.mul(an).add(&an.mul(am));
                let cc = cm.mul(cn).add(&cn.mul(cm));
                worst = worst.max(mixed.max_abs()).max(aa.max_abs()).max(cc.max_abs());
            }
        }
        worst
    }
}

/// `Π_{n∈occ} a_n† |bare⟩`, highest mode applied first.
pub fn build_vacuum_vector(ladders: &LadderSet, occ: &OccupationSet) -> Result<FockVector> {
    check_modes(ladders, occ.dim())?;
    let mut v = ladders.bare_vacuum();
    for &n in occ.occupied().iter().rev() {
        v = v.apply(ladders.creator(n));
    }
    Ok(v)
}

/// Determinant `Π_o b_o† |bare⟩` with `b_o† = Σ_n C_no a_n†`.
pub fn slater_vector(ladders: &LadderSet, orbitals: &DMatrix<Complex64>) -> Result<FockVector> {
    check_modes(ladders, orbitals.nrows())?;
    let mut v = ladders.bare_vacuum();
    for o in (0..orbitals.ncols()).rev() {
        let mut next = vec![ZERO; ladders.dim()];
        for n in 0..ladders.mode_count() {
            let c = orbitals[(n, o)];
            if c == ZERO {
                continue;
            }
            for (acc, x) in next.iter_mut().zip(ladders.creator(n).matvec(&v.amplitudes)) {
                *acc += c * x;
            }
        }
        v = FockVector { amplitudes: next };
    }
    Ok(v)
}

fn check_modes(ladders: &LadderSet, dim: usize) -> Result<()> {
    if dim != ladders.mode_count() {
        return Err(Error::Dimension {
            expected: ladders.mode_count(),
            actual: dim,
        });
    }
    Ok(())
}

/// `Σ_nm K_nm a_n† a_m - c·1`, assembled from products of ladder matrices.
pub fn bilinear_matrix(ladders: &LadderSet, kernel: &OneBodyKernel) -> Result<SparseOp> {
    let k = &kernel.coeffs;
    check_modes(ladders, k.nrows())?;
    check_modes(ladders, k.ncols())?;
    let mut op = SparseOp::identity(ladders.dim()).scale(-kernel.subtraction);
    for n in 0..ladders.mode_count() {
        for m in 0..ladders.mode_count() {
            if k[(n, m)] == ZERO {
                continue;
            }
            let term = ladders.creator(n).mul(ladders.annihilator(m)).scale(k[(n, m)]);
            op = op.add(&term);
        }
    }
    Ok(op)
}

/// `⟨s|(AB - BA)|s⟩`.
pub fn commutator_expectation(state: &FockVector, a: &SparseOp, b: &SparseOp) -> Complex64 {
    let ab = a.matvec(&b.matvec(&state.amplitudes));
    let ba = b.matvec(&a.matvec(&state.amplitudes));
    state.inner(&ab) - state.inner(&ba)
}

/// All `2^M` eigenvalues of the diagonal many-body free Hamiltonian, indexed
/// by occupation string: `Σ_{n∈s} K_nn - c`.
///
/// Fails when `k_h0` is not diagonal or does not put the vacuum `occ` at 0.
pub fn spectrum_of_h0_sector(
    ladders: &LadderSet,
    k_h0: &OneBodyKernel,
    occ: &OccupationSet,
) -> Result<Vec<f64>> {
    let k = &k_h0.coeffs;
    check_modes(ladders, k.nrows())?;
    check_modes(ladders, occ.dim())?;
    for n in 0..k.nrows() {
        for m in 0..k.ncols() {
            if n != m && k[(n, m)] != ZERO {
                return Err(Error::Invariant(format!(
                    "free Hamiltonian kernel has off-diagonal entry ({n},{m})"
                )));
            }
        }
    }
    let diag: Vec<f64> = (0..k.nrows()).map(|n| k[(n, n)].re).collect();
    let c = k_h0.subtraction.re;
    let spectrum: Vec<f64> = (0..ladders.dim())
        .map(|s| {
            (0..diag.len())
                .filter(|&n| s & (1 << n) != 0)
                .map(|n| diag[n])
                .sum::<f64>()
                - c
        })
        .collect();
    let vac_index: usize = occ.occupied().iter().map(|&n| 1usize << n).sum();
    let scale = diag.iter().map(|d| d.abs()).sum::<f64>().max(1.0);
    if spectrum[vac_index].abs() > 1e-12 * scale {
        return Err(Error::Invariant(format!(
            "vacuum level is {} rather than 0; subtraction does not match the occupation set",
            spectrum[vac_index]
        )));
    }
    Ok(spectrum)
}

/// Occupation string of a basis index as a list of modes.
pub fn occupied_modes(state: usize, mode_count: usize) -> Vec<usize> {
    (0..mode_count).filter(|&n| state & (1 << n) != 0).collect()
}
