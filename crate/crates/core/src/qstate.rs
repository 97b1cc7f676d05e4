//! Finite-dimensional complex linear algebra over tensor-product bases:
//! kets, operators, Kronecker products and spectral decompositions.
//!
//! States are dense and may be unnormalized; every downstream formula is a
//! ratio, so results never depend on normalization. Basis convention: each
//! subsystem's z-basis is ordered by descending eigenvalue (spin-up first),
//! and composite indices are lexicographic over the subsystem list.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for the hermiticity check at operator construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this merge into one degenerate projector.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A pure state over a tensor product of finite-dimensional subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
    dims: Vec<usize>,
}

impl Ket {
    /// Builds a ket from amplitudes in the lexicographic product basis.
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || len != amps.len() {
            return Err(Error::BadDims {
                dims,
                len: amps.len(),
            });
        }
        let ket = Ket { amps, dims };
        let n = ket.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::DegenerateState);
        }
        Ok(ket)
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(amps: &[f64], dims: &[usize]) -> Result<Self> {
        Ket::new(
            amps.iter().map(|&x| C64::new(x, 0.0)).collect(),
            dims.to_vec(),
        )
    }

    /// The basis ket with a single unit amplitude at `index`.
    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let len: usize = dims.iter().product();
        if index >= len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: index,
            });
        }
        let mut amps = vec![C64::ZERO; len];
        amps[index] = C64::ONE;
        Ket::new(amps, dims.to_vec())
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Explicit normalization; unnormalized kets are otherwise first-class.
    pub fn normalized(&self) -> Ket {
        let n = self.norm();
        Ket {
            amps: self.amps.iter().map(|a| a / n).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn scaled(&self, c: C64) -> Ket {
        Ket {
            amps: self.amps.iter().map(|a| a * c).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Ket {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
            dims: self.dims.clone(),
        })
    }
}

/// `⟨bra|ket⟩`, conjugate-linear in the first argument.
pub fn inner(bra: &Ket, ket: &Ket) -> Result<C64> {
    if bra.dims != ket.dims {
        return Err(Error::DimensionMismatch {
            expected: bra.len(),
            got: ket.len(),
        });
    }
    Ok(bra
        .amps
        .iter()
        .zip(&ket.amps)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// Kronecker product of kets; dims concatenate, norms multiply.
pub fn tensor(factors: &[Ket]) -> Result<Ket> {
    if factors.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let mut amps = vec![C64::ONE];
    let mut dims = Vec::new();
    for f in factors {
        let mut next = Vec::with_capacity(amps.len() * f.len());
        for a in &amps {
            for b in &f.amps {
                next.push(a * b);
            }
        }
        amps = next;
        dims.extend_from_slice(&f.dims);
    }
    Ket::new(amps, dims)
}

/// A dense operator on the same tensor-product space as [`Ket`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: Vec<C64>, // row-major, dim x dim
    dims: Vec<usize>,
    hermitian: bool,
}

impl Operator {
    /// Builds an operator from row-major entries; the hermitian flag is
    /// detected within [`HERMITICITY_TOL`].
    pub fn new(entries: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || entries.len() != n * n {
            return Err(Error::BadDims {
                dims,
                len: entries.len(),
            });
        }
        let mut op = Operator {
            entries,
            dims,
            hermitian: false,
        };
        op.hermitian = op.hermiticity_deviation() <= HERMITICITY_TOL;
        Ok(op)
    }

    /// As [`Operator::new`] but rejects non-hermitian entries.
    pub fn hermitian(entries: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let op = Operator::new(entries, dims)?;
        if !op.hermitian {
            return Err(Error::NotHermitian {
                max_dev: op.hermiticity_deviation(),
            });
        }
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<C64>], dims: Vec<usize>) -> Result<Self> {
        let entries = rows.iter().flatten().copied().collect();
        Operator::new(entries, dims)
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        let mut entries = vec![C64::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = C64::ONE;
        }
        Operator {
            entries,
            dims: dims.to_vec(),
            hermitian: true,
        }
    }

    /// Diagonal operator on a single subsystem.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut entries = vec![C64::ZERO; n * n];
        for (i, &v) in values.iter().enumerate() {
            entries[i * n + i] = C64::new(v, 0.0);
        }
        Operator {
            entries,
            dims: vec![n],
            hermitian: true,
        }
    }

    /// Pauli z on a qubit, spin-up first: diag(+1, -1).
    pub fn sigma_z() -> Self {
        Operator::diagonal(&[1.0, -1.0])
    }

    /// Spin-1 z component, descending: diag(+1, 0, -1).
    pub fn spin1_z() -> Self {
        Operator::diagonal(&[1.0, 0.0, -1.0])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        dev
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.dims != ket.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ket.len(),
            });
        }
        let n = self.dim();
        let mut amps = vec![C64::ZERO; n];
        for (i, amp) in amps.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for j in 0..n {
                acc += self.entries[i * n + j] * ket.amps[j];
            }
            *amp = acc;
        }
        Ok(Ket {
            amps,
            dims: ket.dims.clone(),
        })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let n = self.dim();
        let mut entries = vec![C64::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Operator::new(entries, self.dims.clone())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Operator::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            self.dims.clone(),
        )
    }

    pub fn scaled(&self, c: C64) -> Operator {
        Operator {
            entries: self.entries.iter().map(|e| e * c).collect(),
            dims: self.dims.clone(),
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim();
        let mut entries = vec![C64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Operator {
            entries,
            dims: self.dims.clone(),
            hermitian: self.hermitian,
        }
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Operator) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab
            .entries
            .iter()
            .zip(&ba.entries)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}

/// `⟨bra|O|ket⟩`.
pub fn matrix_element(bra: &Ket, op: &Operator, ket: &Ket) -> Result<C64> {
    inner(bra, &op.apply(ket)?)
}

/// Lifts a single-site operator to the full space, identity elsewhere.
pub fn embed(local: &Operator, site: usize, dims: &[usize]) -> Result<Operator> {
    if site >= dims.len() {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: dims.len(),
        });
    }
    if local.dims != [dims[site]] {
        return Err(Error::DimensionMismatch {
            expected: dims[site],
            got: local.dim(),
        });
    }
    let n: usize = dims.iter().product();
    let d = dims[site];
    // stride between consecutive site indices; block = span of one site index
    let stride: usize = dims[site + 1..].iter().product();
    let mut entries = vec![C64::ZERO; n * n];
    for row in 0..n {
        let rs = (row / stride) % d;
        let base = row - rs * stride;
        for cs in 0..d {
            let v = local.entries[rs * d + cs];
            if v == C64::ZERO {
                continue;
            }
            let col = base + cs * stride;
            entries[row * n + col] = v;
        }
    }
    let mut op = Operator {
        entries,
        dims: dims.to_vec(),
        hermitian: local.hermitian,
    };
    if !local.hermitian {
        op.hermitian = op.hermiticity_deviation() <= HERMITICITY_TOL;
    }
    Ok(op)
}

/// One eigenvalue with its (possibly degenerate) projector.
#[derive(Debug, Clone)]
pub struct SpectralLine {
    pub eigenvalue: f64,
    pub projector: Operator,
    pub multiplicity: usize,
}

/// Spectral decomposition of a hermitian operator, eigenvalues ascending,
/// with eigenvalues merged into degenerate projectors within
/// [`DEGENERACY_TOL`].
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    lines: Vec<SpectralLine>,
    dims: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lines.iter().map(|l| l.eigenvalue).collect()
    }

    /// Reassembles `Σ λ_j P_j`.
    pub fn reconstruct(&self) -> Operator {
        let mut acc = Operator::identity(&self.dims).scaled(C64::ZERO);
        for line in &self.lines {
            acc = acc
                .add(&line.projector.scaled(C64::new(line.eigenvalue, 0.0)))
                .expect("projector dims match");
        }
        acc
    }
}

/// Spectral decomposition by cyclic Jacobi; input must be hermitian.
pub fn eigendecompose(op: &Operator) -> Result<SpectralDecomposition> {
    if !op.hermitian {
        return Err(Error::NotHermitian {
            max_dev: op.hermiticity_deviation(),
        });
    }
    let n = op.dim();
    let (mut eigs, vecs) = jacobi_hermitian(&op.entries, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigs[a].total_cmp(&eigs[b]));
    eigs = order.iter().map(|&i| eigs[i]).collect();

    // group eigenvalues by chained proximity
    let mut lines = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigs[end] - eigs[end - 1] <= DEGENERACY_TOL {
            end += 1;
        }
        let group: Vec<usize> = (start..end).collect();
        let eigenvalue = group.iter().map(|&g| eigs[g]).sum::<f64>() / group.len() as f64;
        let mut entries = vec![C64::ZERO; n * n];
        for &g in &group {
            let col = order[g];
            for i in 0..n {
                let vi = vecs[i * n + col];
                for j in 0..n {
                    entries[i * n + j] += vi * vecs[j * n + col].conj();
                }
            }
        }
        lines.push(SpectralLine {
            eigenvalue,
            projector: Operator {
                entries,
                dims: op.dims.clone(),
                hermitian: true,
            },
            multiplicity: group.len(),
        });
        start = end;
    }
    Ok(SpectralDecomposition {
        lines,
        dims: op.dims.clone(),
    })
}

/// Cyclic Jacobi diagonalization of a hermitian matrix.
///
/// Returns eigenvalues and the unitary of eigenvectors (columns), both
/// unsorted. Exactly diagonal input returns the identity unitary, which
/// keeps basis-aligned projectors exact.
fn jacobi_hermitian(entries: &[C64], n: usize) -> (Vec<f64>, Vec<C64>) {
    let mut a = entries.to_vec();
    let mut v = vec![C64::ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = C64::ONE;
    }
    let scale = entries.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let thresh = (scale * 1e-15).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].norm());
            }
        }
        if off <= thresh {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = a[p * n + q];
                let abs_g = gamma.norm();
                if abs_g <= thresh {
                    continue;
                }
                let alpha = a[p * n + p].re;
                let beta = a[q * n + q].re;
                let phase = gamma / abs_g; // e^{i phi}
                let tau = (beta - alpha) / (2.0 * abs_g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R_pp = c, R_pq = s, R_qp = -s e^{-i phi}, R_qq = c e^{-i phi}
                let rqp = -phase.conj() * s;
                let rqq = phase.conj() * c;
                // columns: A <- A R
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * c + aiq * rqp;
                    a[i * n + q] = aip * s + aiq * rqq;
                }
                // rows: A <- R^dag A
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = apj * c + aqj * rqp.conj();
                    a[q * n + j] = apj * s + aqj * rqq.conj();
                }
                a[p * n + q] = C64::ZERO;
                a[q * n + p] = C64::ZERO;
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * c + viq * rqp;
                    v[i * n + q] = vip * s + viq * rqq;
                }
            }
        }
    }
    let eigs = (0..n).map(|i| a[i * n + i].re).collect();
    (eigs, v)
}

/// A joint eigenspace of a commuting family: one eigenvalue per operator
/// plus an orthonormal basis (kets spanning the subspace).
#[derive(Debug, Clone)]
pub struct JointEigenspace {
    pub values: Vec<f64>,
    pub basis: Vec<Ket>,
}

impl JointEigenspace {
    /// Projection of `ket` onto this eigenspace.
    pub fn project(&self, ket: &Ket) -> Result<Ket> {
        let mut out = ket.scaled(C64::ZERO);
        for b in &self.basis {
            let c = inner(b, ket)?;
            out = out.add(&b.scaled(c))?;
        }
        Ok(out)
    }
}

/// Simultaneous eigenbasis of pairwise-commuting hermitian operators,
/// built by recursive subspace refinement. Spaces are ordered
/// lexicographically by eigenvalue tuple.
pub fn joint_eigenbasis(ops: &[Operator]) -> Result<Vec<JointEigenspace>> {
    if ops.is_empty() {
        return Err(Error::InvalidConfig("no observables".into()));
    }
    let dims = ops[0].dims.clone();
    let n: usize = dims.iter().product();
    for op in ops {
        if !op.hermitian {
            return Err(Error::NotHermitian {
                max_dev: op.hermiticity_deviation(),
            });
        }
        if op.dims != dims {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.dim(),
            });
        }
    }
    let scale = ops.iter().map(|o| o.max_abs_entry()).fold(1.0, f64::max);
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let r = ops[i].commutator_norm(&ops[j])?;
            if r > 1e-10 * scale * scale {
                return Err(Error::NonCommuting { residual: r });
            }
        }
    }

    let identity: Vec<Ket> = (0..n)
        .map(|i| Ket::basis(&dims, i).expect("basis index in range"))
        .collect();
    let mut spaces = vec![JointEigenspace {
        values: Vec::new(),
        basis: identity,
    }];

    for op in ops {
        let mut refined = Vec::new();
        for space in &spaces {
            let r = space.basis.len();
            // restrict op to the subspace: m = B^dag Op B
            let mut m = vec![C64::ZERO; r * r];
            let applied: Vec<Ket> = space
                .basis
                .iter()
                .map(|b| op.apply(b).expect("dims checked"))
                .collect();
            for (i, bi) in space.basis.iter().enumerate() {
                for (j, aj) in applied.iter().enumerate() {
                    m[i * r + j] = inner(bi, aj)?;
                }
            }
            // hermitize against roundoff
            for i in 0..r {
                for j in (i + 1)..r {
                    let avg = (m[i * r + j] + m[j * r + i].conj()) * 0.5;
                    m[i * r + j] = avg;
                    m[j * r + i] = avg.conj();
                }
                m[i * r + i] = C64::new(m[i * r + i].re, 0.0);
            }
            let (eigs, vecs) = jacobi_hermitian(&m, r);
            let mut order: Vec<usize> = (0..r).collect();
            order.sort_by(|&x, &y| eigs[x].total_cmp(&eigs[y]));
            let mut start = 0;
            while start < r {
                let mut end = start + 1;
                while end < r
                    && eigs[order[end]] - eigs[order[end - 1]] <= DEGENERACY_TOL
                {
                    end += 1;
                }
                let group = &order[start..end];
                let eigenvalue =
                    group.iter().map(|&g| eigs[g]).sum::<f64>() / group.len() as f64;
                let mut basis = Vec::with_capacity(group.len());
                for &col in group {
                    // new basis vector = sum_i B_i * vecs[i][col]
                    let mut vket = space.basis[0].scaled(vecs[col]);
                    for (i, b) in space.basis.iter().enumerate().skip(1) {
                        vket = vket.add(&b.scaled(vecs[i * r + col]))?;
                    }
                    basis.push(vket);
                }
                let mut values = space.values.clone();
                values.push(eigenvalue);
                refined.push(JointEigenspace { values, basis });
                start = end;
            }
        }
        spaces = refined;
    }
    spaces.sort_by(|a, b| {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(spaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn up() -> Ket {
        Ket::from_real(&[1.0, 0.0], &[2]).unwrap()
    }

    fn down() -> Ket {
        Ket::from_real(&[0.0, 1.0], &[2]).unwrap()
    }

    fn up_x() -> Ket {
        Ket::from_real(&[1.0, 1.0], &[2]).unwrap().normalized()
    }

    #[test]
    fn tensor_basis_case() {
        let t = tensor(&[up(), down()]).unwrap();
        assert_eq!(t.dims(), &[2, 2]);
        assert_eq!(t.amps()[1], C64::ONE);
        assert_eq!(t.amps().iter().filter(|a| **a != C64::ZERO).count(), 1);
    }

    #[test]
    fn tensor_up_x_pair() {
        let t = tensor(&[up_x(), up_x()]).unwrap();
        for a in t.amps() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_single_factor_is_identity() {
        let t = tensor(&[up_x()]).unwrap();
        assert_eq!(t, up_x());
    }

    #[test]
    fn tensor_empty_errors() {
        assert!(matches!(tensor(&[]), Err(Error::EmptyTensor)));
    }

    #[test]
    fn tensor_norm_multiplies() {
        let a = Ket::new(vec![c(1.0, 2.0), c(0.5, -0.25)], vec![2]).unwrap();
        let b = Ket::new(vec![c(0.0, 1.0), c(2.0, 0.0), c(0.5, 0.5)], vec![3]).unwrap();
        let t = tensor(&[a.clone(), b.clone()]).unwrap();
        assert_abs_diff_eq!(t.norm(), a.norm() * b.norm(), epsilon = 1e-12);
    }

    #[test]
    fn embed_sigma_z_eigenstates() {
        let dims = [2, 2];
        let updown = tensor(&[up(), down()]).unwrap();
        let za = embed(&Operator::sigma_z(), 0, &dims).unwrap();
        let zb = embed(&Operator::sigma_z(), 1, &dims).unwrap();
        let plus = za.apply(&updown).unwrap();
        let minus = zb.apply(&updown).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(plus.amps()[i].re, updown.amps()[i].re, epsilon = 0.0);
            assert_abs_diff_eq!(minus.amps()[i].re, -updown.amps()[i].re, epsilon = 0.0);
        }
    }

    #[test]
    fn embed_spin1_zero_eigenvalue() {
        // |0>_A |1>_B with descending basis (+1, 0, -1): indices 1 and 0
        let a = Ket::from_real(&[0.0, 1.0, 0.0], &[3]).unwrap();
        let b = Ket::from_real(&[1.0, 0.0, 0.0], &[3]).unwrap();
        let state = tensor(&[a, b]).unwrap();
        let za = embed(&Operator::spin1_z(), 0, &[3, 3]).unwrap();
        let applied = za.apply(&state).unwrap();
        assert_abs_diff_eq!(applied.norm(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(
            embed(&Operator::sigma_z(), 2, &[2, 2]),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(matches!(
            embed(&Operator::sigma_z(), 0, &[3, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inner_products() {
        let updown = tensor(&[up(), down()]).unwrap();
        assert_eq!(inner(&updown, &updown).unwrap(), C64::ONE);
        let downup = tensor(&[down(), up()]).unwrap();
        assert_eq!(inner(&updown, &downup).unwrap(), C64::ZERO);
    }

    #[test]
    fn inner_product_phase_states_is_half() {
        // oracle: the four-term sum (1 - i + i + 1)/4 by hand
        let psi = Ket::new(vec![c(0.25, 0.0); 4], vec![2, 2]).unwrap();
        let psi = psi.scaled(c(2.0, 0.0)); // amplitudes 1/2
        let phi = Ket::new(
            vec![c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0)],
            vec![2, 2],
        )
        .unwrap();
        let hand = (c(1.0, 0.0) + c(0.0, -1.0) * c(1.0, 0.0) + c(0.0, 1.0) + c(1.0, 0.0)) * 0.25;
        let got = inner(&phi, &psi).unwrap();
        assert_abs_diff_eq!(got.re, hand.re, epsilon = 1e-15);
        assert_abs_diff_eq!(got.im, hand.im, epsilon = 1e-15);
        assert_abs_diff_eq!(got.re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn sum_observable_spectrum() {
        let dims = [2, 2];
        let za = embed(&Operator::sigma_z(), 0, &dims).unwrap();
        let zb = embed(&Operator::sigma_z(), 1, &dims).unwrap();
        let sum = za.add(&zb).unwrap();
        let dec = eigendecompose(&sum).unwrap();
        assert_eq!(dec.eigenvalues(), vec![-2.0, 0.0, 2.0]);
        let mults: Vec<usize> = dec.lines().iter().map(|l| l.multiplicity).collect();
        assert_eq!(mults, vec![1, 2, 1]);
    }

    #[test]
    fn product_observable_spectrum() {
        let dims = [2, 2];
        let za = embed(&Operator::sigma_z(), 0, &dims).unwrap();
        let zb = embed(&Operator::sigma_z(), 1, &dims).unwrap();
        let prod = za.matmul(&zb).unwrap();
        let dec = eigendecompose(&prod).unwrap();
        assert_eq!(dec.eigenvalues(), vec![-1.0, 1.0]);
        let mults: Vec<usize> = dec.lines().iter().map(|l| l.multiplicity).collect();
        assert_eq!(mults, vec![2, 2]);
    }

    #[test]
    fn spin1_product_spectrum_matches_enumeration() {
        // oracle: enumerate the 9 product eigenstates m_A * m_B
        let mut counts = std::collections::BTreeMap::new();
        for ma in [-1i32, 0, 1] {
            for mb in [-1i32, 0, 1] {
                *counts.entry(ma * mb).or_insert(0usize) += 1;
            }
        }
        let dims = [3, 3];
        let za = embed(&Operator::spin1_z(), 0, &dims).unwrap();
        let zb = embed(&Operator::spin1_z(), 1, &dims).unwrap();
        let prod = za.matmul(&zb).unwrap();
        let dec = eigendecompose(&prod).unwrap();
        assert_eq!(dec.eigenvalues(), vec![-1.0, 0.0, 1.0]);
        let mults: Vec<usize> = dec.lines().iter().map(|l| l.multiplicity).collect();
        assert_eq!(mults, vec![counts[&-1], counts[&0], counts[&1]]);
        assert_eq!(mults, vec![2, 5, 2]);
    }

    #[test]
    fn eigendecompose_rejects_non_hermitian() {
        let op = Operator::new(
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![2],
        )
        .unwrap();
        assert!(matches!(
            eigendecompose(&op),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectral_invariants_on_dense_hermitian() {
        // a fixed non-trivial hermitian 3x3
        let m = vec![
            c(1.0, 0.0),
            c(0.5, 0.25),
            c(0.0, -1.0),
            c(0.5, -0.25),
            c(-0.5, 0.0),
            c(0.75, 0.5),
            c(0.0, 1.0),
            c(0.75, -0.5),
            c(2.0, 0.0),
        ];
        let op = Operator::hermitian(m, vec![3]).unwrap();
        let dec = eigendecompose(&op).unwrap();
        check_spectral(&op, &dec, 1e-10);
    }

    fn check_spectral(op: &Operator, dec: &SpectralDecomposition, tol: f64) {
        let n = op.dim();
        // projectors idempotent, mutually orthogonal, sum to identity
        let mut sum = Operator::identity(op.dims()).scaled(C64::ZERO);
        for (i, li) in dec.lines().iter().enumerate() {
            let sq = li.projector.matmul(&li.projector).unwrap();
            for k in 0..n * n {
                assert!((sq.entries()[k] - li.projector.entries()[k]).norm() < tol);
            }
            for (j, lj) in dec.lines().iter().enumerate() {
                if i != j {
                    let pr = li.projector.matmul(&lj.projector).unwrap();
                    assert!(pr.max_abs_entry() < tol, "projectors not orthogonal");
                }
            }
            sum = sum.add(&li.projector).unwrap();
        }
        let id = Operator::identity(op.dims());
        for k in 0..n * n {
            assert!((sum.entries()[k] - id.entries()[k]).norm() < tol);
        }
        // reconstruction
        let rec = dec.reconstruct();
        for k in 0..n * n {
            assert!(
                (rec.entries()[k] - op.entries()[k]).norm() < tol,
                "reconstruction off at {k}"
            );
        }
    }

    #[test]
    fn joint_eigenbasis_two_qubit_z() {
        let dims = [2, 2];
        let za = embed(&Operator::sigma_z(), 0, &dims).unwrap();
        let zb = embed(&Operator::sigma_z(), 1, &dims).unwrap();
        let spaces = joint_eigenbasis(&[za, zb]).unwrap();
        assert_eq!(spaces.len(), 4);
        let tuples: Vec<Vec<f64>> = spaces.iter().map(|s| s.values.clone()).collect();
        assert_eq!(
            tuples,
            vec![
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0]
            ]
        );
    }

    #[test]
    fn joint_eigenbasis_rejects_non_commuting() {
        let sx = Operator::hermitian(
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![2],
        )
        .unwrap();
        let dims = [2];
        let z = Operator::sigma_z();
        assert!(matches!(
            joint_eigenbasis(&[embed(&z, 0, &dims).unwrap(), embed(&sx, 0, &dims).unwrap()]),
            Err(Error::NonCommuting { .. })
        ));
    }

    // --- property tests ---

    fn arb_c64() -> impl Strategy<Value = C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c(re, im))
    }

    fn arb_dims() -> impl Strategy<Value = Vec<usize>> {
        prop_oneof![
            Just(vec![2]),
            Just(vec![3]),
            Just(vec![2, 2]),
            Just(vec![2, 3]),
            Just(vec![3, 3]),
        ]
    }

    fn arb_hermitian(dims: Vec<usize>) -> impl Strategy<Value = Operator> {
        let n: usize = dims.iter().product();
        proptest::collection::vec(arb_c64(), n * n).prop_map(move |raw| {
            let mut entries = vec![C64::ZERO; n * n];
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] = (raw[i * n + j] + raw[j * n + i].conj()) * 0.5;
                }
            }
            Operator::hermitian(entries, dims.clone()).unwrap()
        })
    }

    fn arb_ket(dims: Vec<usize>) -> impl Strategy<Value = Ket> {
        let n: usize = dims.iter().product();
        proptest::collection::vec(arb_c64(), n)
            .prop_filter("nonzero", |a| a.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-3)
            .prop_map(move |amps| Ket::new(amps, dims.clone()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_reconstruction(op in arb_dims().prop_flat_map(arb_hermitian)) {
            let dec = eigendecompose(&op).unwrap();
            check_spectral(&op, &dec, 1e-9);
        }

        #[test]
        fn prop_matrix_element_conjugate_symmetric(
            (op, phi, psi) in arb_dims().prop_flat_map(|d| (
                arb_hermitian(d.clone()),
                arb_ket(d.clone()),
                arb_ket(d),
            ))
        ) {
            let forward = matrix_element(&phi, &op, &psi).unwrap();
            let backward = matrix_element(&psi, &op, &phi).unwrap();
            prop_assert!((forward - backward.conj()).norm() < 1e-10);
        }

        #[test]
        fn prop_embed_commutes_with_tensor(
            (a, b, ka, kb) in (
                arb_hermitian(vec![2]),
                arb_hermitian(vec![3]),
                arb_ket(vec![2]),
                arb_ket(vec![3]),
            )
        ) {
            let dims = [2, 3];
            let ea = embed(&a, 0, &dims).unwrap();
            let eb = embed(&b, 1, &dims).unwrap();
            let lhs = ea.matmul(&eb).unwrap()
                .apply(&tensor(&[ka.clone(), kb.clone()]).unwrap())
                .unwrap();
            let rhs = tensor(&[a.apply(&ka).unwrap(), b.apply(&kb).unwrap()]).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs.amps()[i] - rhs.amps()[i]).norm() < 1e-12);
            }
        }
    }
}
