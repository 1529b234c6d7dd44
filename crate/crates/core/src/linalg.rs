//! Dense complex linear algebra shared by the physics modules.
//!
//! Basis convention for the bipartite space: index `site * d_b + level`,
//! i.e. the A factor is the slow index, matching `kron(a, b)`.

use nalgebra::{DMatrix, DVector};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Singular values, largest first. Empty matrices have none.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Schatten-1 norm from the singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), CMat::zeros(0, 0));
    }
    // Symmetrize so rounding noise in the input does not leak into the solver.
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0.iter().copied().collect()
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `V diag(f(λ)) V†` for a Hermitian spectral decomposition.
pub fn spectral_function(
    values: &DVector<f64>,
    vectors: &CMat,
    f: impl Fn(f64) -> C64,
) -> CMat {
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let fj = f(lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Partial transpose on the second (B) tensor factor.
pub fn partial_transpose_b(m: &CMat, d_b: usize) -> CMat {
    let n = m.nrows();
    assert!(d_b > 0 && n % d_b == 0, "dimension {n} not divisible by d_b = {d_b}");
    let d_a = n / d_b;
    let mut out = CMat::zeros(n, n);
    for i in 0..d_a {
        for j in 0..d_a {
            for k in 0..d_b {
                for l in 0..d_b {
                    out[(i * d_b + k, j * d_b + l)] = m[(i * d_b + l, j * d_b + k)];
                }
            }
        }
    }
    out
}

/// Partial trace over the B factor.
pub fn partial_trace_b(m: &CMat, d_b: usize) -> CMat {
    let d_a = m.nrows() / d_b;
    CMat::from_fn(d_a, d_a, |i, j| {
        (0..d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum()
    })
}

/// Partial trace over the A factor.
pub fn partial_trace_a(m: &CMat, d_b: usize) -> CMat {
    let d_a = m.nrows() / d_b;
    CMat::from_fn(d_b, d_b, |k, l| {
        (0..d_a).map(|i| m[(i * d_b + k, i * d_b + l)]).sum()
    })
}

/// Principal submatrix on the given index list.
pub fn principal_block(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub fn block(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn projector(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

/// Haar-ish random unit vector (normalized complex Gaussian).
pub fn random_unit_vector<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    use rand_distr::{Distribution, StandardNormal};
    let v = CVec::from_fn(n, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMat::from_fn(n, n, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column phases so the distribution is Haar.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm(), 0.0) } else { ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMat::from_fn(n, n, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Random density matrix of the given rank.
pub fn random_density<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let mut rho = CMat::zeros(n, n);
    for _ in 0..rank.max(1) {
        let v = random_unit_vector(rng, n);
        rho += projector(&v) * c(rng.gen::<f64>(), 0.0);
    }
    let tr = rho.trace().re;
    rho / c(tr, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_dimensions_and_entries() {
        let a = CMat::from_row_slice(2, 2, &[ONE, c(2.0, 0.0), ZERO, ONE]);
        let b = CMat::identity(3, 3);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(0, 3)], c(2.0, 0.0));
        assert_eq!(k[(1, 4)], c(2.0, 0.0));
        assert_eq!(k[(3, 0)], ZERO);
    }

    #[test]
    fn trace_norm_of_hermitian_matches_eigenvalue_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 7);
        let abs_sum: f64 = hermitian_eigenvalues(&h).iter().map(|x| x.abs()).sum();
        assert!((trace_norm(&h) - abs_sum).abs() < 1e-10);
    }

    #[test]
    fn partial_transpose_is_involution_and_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&mut rng, 6, 3);
        let pt = partial_transpose_b(&rho, 2);
        assert!((pt.trace() - rho.trace()).norm() < 1e-14);
        assert_eq!(partial_transpose_b(&pt, 2), rho);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 5);
        let err = max_abs_entry(&(&u * u.adjoint() - identity(5)));
        assert!(err < 1e-12);
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 9);
        let (w, v) = hermitian_eigen(&h);
        let back = spectral_function(&w, &v, |x| c(x, 0.0));
        assert!(max_abs_entry(&(back - &h)) < 1e-11);
        assert!(w.as_slice().windows(2).all(|p| p[0] <= p[1]));
    }
}
